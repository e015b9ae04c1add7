#include "vlmc/model_json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

namespace vlmc {

using nlohmann::ordered_json;

double round_sig(double v, int digits) {
    if (!std::isfinite(v)) return v;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return std::strtod(buf, nullptr);
}

bool ModelFile::joint() const {
    for (const auto& e : entries)
        if (e.group >= 0) return true;
    return false;
}

namespace {

ordered_json theta_json(const std::optional<std::vector<double>>& theta) {
    if (!theta.has_value()) return nullptr;
    ordered_json arr = ordered_json::array();
    for (double p : *theta) arr.push_back(round_sig(p));
    return arr;
}

} // namespace

ordered_json model_file_to_json(const ModelFile& file) {
    std::vector<const ModelFile::Entry*> order;
    order.reserve(file.entries.size());
    for (const auto& e : file.entries) order.push_back(&e);
    std::stable_sort(order.begin(), order.end(),
                     [](const ModelFile::Entry* a, const ModelFile::Entry* b) {
                         if (a->group != b->group) return a->group < b->group;
                         return ContextOrder{}(a->context, b->context);
                     });
    ordered_json j;
    j["alphabet"] = file.alphabet.tokens();
    ordered_json contexts = ordered_json::array();
    for (const ModelFile::Entry* e : order) {
        ordered_json entry;
        entry["context"] = context_display(e->context, file.alphabet);
        if (e->group >= 0) entry["group"] = e->group;
        entry["theta"] = theta_json(e->theta);
        contexts.push_back(std::move(entry));
    }
    j["contexts"] = std::move(contexts);
    return j;
}

ModelFile model_file_from_json(const ordered_json& j) {
    if (!j.is_object() || !j.contains("alphabet") || !j.contains("contexts"))
        throw std::runtime_error("model JSON must contain 'alphabet' and 'contexts'");
    std::vector<std::string> tokens;
    for (const auto& t : j.at("alphabet")) tokens.push_back(t.get<std::string>());

    ModelFile file;
    file.alphabet = Alphabet(std::move(tokens));
    for (const auto& entry : j.at("contexts")) {
        ModelFile::Entry e;
        e.context = context_parse(entry.at("context").get<std::string>(), file.alphabet);
        if (entry.contains("group")) {
            e.group = entry.at("group").get<int>();
            if (e.group < 0 || e.group > 2)
                throw std::runtime_error("model JSON: group must be 0, 1 or 2");
        }
        const auto& th = entry.at("theta");
        if (!th.is_null()) {
            std::vector<double> row;
            for (const auto& p : th) row.push_back(p.get<double>());
            if (static_cast<int>(row.size()) != file.alphabet.size())
                throw std::runtime_error("model JSON: theta row size does not match the alphabet");
            e.theta = std::move(row);
        }
        file.entries.push_back(std::move(e));
    }
    return file;
}

ProbabilisticContextTree to_model(const ModelFile& file) {
    if (file.joint())
        throw std::runtime_error("expected a single-tree model file, got a joint one");
    std::map<Context, std::vector<double>, ContextOrder> theta;
    for (const auto& e : file.entries) {
        if (!e.theta.has_value())
            throw std::runtime_error("model has an undefined distribution for context '" +
                                     context_display(e.context, file.alphabet) + "'");
        if (!theta.emplace(e.context, *e.theta).second)
            throw std::runtime_error("duplicate context in model file");
    }
    // File values carry 10 significant digits; accept that much rounding.
    return ProbabilisticContextTree::create(file.alphabet, std::move(theta), 1e-9);
}

ModelFile to_model_file(const Alphabet& alphabet, const SingleFit& fit) {
    ModelFile file;
    file.alphabet = alphabet;
    for (const auto& [ctx, theta] : fit.theta) file.entries.push_back({ctx, -1, theta});
    return file;
}

ModelFile to_model_file(const Alphabet& alphabet, const EstimationResult& result) {
    ModelFile file;
    file.alphabet = alphabet;
    for (const auto& [ctx, theta] : result.theta0) file.entries.push_back({ctx, 0, theta});
    for (const auto& [ctx, theta] : result.theta1) file.entries.push_back({ctx, 1, theta});
    for (const auto& [ctx, theta] : result.theta2) file.entries.push_back({ctx, 2, theta});
    return file;
}

ordered_json score_table_to_json(const ScoreTable& table, const Alphabet& alphabet) {
    ordered_json arr = ordered_json::array();
    for (const auto& e : table.entries) {
        ordered_json row;
        row["context"] = context_display(e.context, alphabet);
        row["vx"] = round_sig(e.vx);
        row["vy"] = round_sig(e.vy);
        row["vxy"] = round_sig(e.vxy);
        row["chi_x"] = static_cast<int>(e.chi_x);
        row["chi_y"] = static_cast<int>(e.chi_y);
        row["chi_xy"] = static_cast<int>(e.chi_xy);
        arr.push_back(std::move(row));
    }
    return arr;
}

ordered_json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open JSON file: " + path);
    ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("failed to parse " + path + ": " + e.what());
    }
    return j;
}

void write_json_file(const std::string& path, const ordered_json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("failed writing JSON file: " + path);
}

} // namespace vlmc
