#include "vlmc/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "vlmc/count_trie.hpp"
#include "vlmc/estimators.hpp"
#include "vlmc/evaluation.hpp"
#include "vlmc/model.hpp"
#include "vlmc/model_json.hpp"
#include "vlmc/seqio.hpp"

namespace vlmc {

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open sequence file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Encodes both samples over one alphabet, inferred from their union when none
// is supplied.
std::pair<std::pair<Sequence, Sequence>, Alphabet> load_pair(const std::string& path_x,
                                                             const std::string& path_y,
                                                             const std::optional<Alphabet>& supplied,
                                                             SeqFileMode mode) {
    const std::string tx = read_file(path_x);
    const std::string ty = read_file(path_y);
    const Alphabet alphabet =
        supplied.has_value() ? *supplied : decode_text(tx + "\n" + ty, std::nullopt, mode).second;
    Sequence x = decode_text(tx, alphabet, mode).first;
    Sequence y = decode_text(ty, alphabet, mode).first;
    return {{std::move(x), std::move(y)}, alphabet};
}

std::uint64_t seed_override(std::uint64_t fallback) {
    const char* env = std::getenv("VLMC_SEED");
    if (!env || !*env) return fallback;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0')
        throw std::runtime_error("VLMC_SEED must be an unsigned integer");
    return static_cast<std::uint64_t>(v);
}

std::string dot_node_id(const Context& ctx) {
    std::string id = "n";
    for (char c : ctx) {
        id.push_back('_');
        id += std::to_string(static_cast<unsigned char>(c));
    }
    return id;
}

std::string theta_label(const std::vector<double>& row) {
    std::string s = "(";
    char buf[32];
    for (std::size_t a = 0; a < row.size(); ++a) {
        std::snprintf(buf, sizeof buf, "%.4f", row[a]);
        if (a > 0) s += ", ";
        s += buf;
    }
    s += ")";
    return s;
}

void export_dot(const ModelFile& file, std::ostream& os) {
    struct NodeInfo {
        std::vector<const ModelFile::Entry*> entries;
    };
    std::map<Context, NodeInfo, ContextOrder> nodes;
    for (const auto& e : file.entries) {
        nodes[e.context].entries.push_back(&e);
        for (std::size_t i = 1; i <= e.context.size(); ++i)
            nodes.emplace(e.context.substr(i), NodeInfo{});
    }

    os << "digraph context_tree {\n";
    os << "  rankdir=RL;\n";
    os << "  node [shape=box, style=filled, fontname=\"Helvetica\"];\n";
    for (const auto& [ctx, info] : nodes) {
        std::string label = ctx.empty() ? "eps" : context_display(ctx, file.alphabet);
        std::string color = "white";
        if (!info.entries.empty()) {
            bool g0 = false, g1 = false, g2 = false, plain = false;
            for (const ModelFile::Entry* e : info.entries) {
                if (e->group == 0) g0 = true;
                else if (e->group == 1) g1 = true;
                else if (e->group == 2) g2 = true;
                else plain = true;
                label += "\\n";
                if (e->group >= 0) label += "s" + std::to_string(e->group) + " ";
                label += e->theta.has_value() ? theta_label(*e->theta) : "(undefined)";
            }
            if (g0) color = "lightblue";
            else if (g1 && g2) color = "gold";
            else if (g1) color = "palegreen";
            else if (g2) color = "lightsalmon";
            else if (plain) color = "lightgrey";
        }
        os << "  " << dot_node_id(ctx) << " [label=\"" << label << "\", fillcolor=" << color
           << "];\n";
    }
    for (const auto& [ctx, info] : nodes) {
        if (ctx.empty()) continue;
        const Context parent = ctx.substr(1);
        const Symbol prepended = static_cast<Symbol>(static_cast<unsigned char>(ctx[0]));
        os << "  " << dot_node_id(parent) << " -> " << dot_node_id(ctx) << " [label=\""
           << file.alphabet.token(prepended) << "\"];\n";
    }
    os << "}\n";
}

struct FitArgs {
    std::string input, input_y, alphabet;
    int depth = -1;
    double lambda = 1.0;
    bool char_mode = false;
    bool scores = false;

    std::optional<Alphabet> supplied_alphabet() const {
        if (alphabet.empty()) return std::nullopt;
        std::istringstream iss(alphabet);
        std::vector<std::string> tokens;
        for (std::string tok; iss >> tok;) tokens.push_back(tok);
        return Alphabet(tokens);
    }
};

int cmd_fit(const FitArgs& a, std::ostream& out) {
    const auto [seq, alphabet] = load_sequence(
        a.input, a.supplied_alphabet(), a.char_mode ? SeqFileMode::chars : SeqFileMode::tokenized);
    const int depth = a.depth >= 0 ? a.depth : default_depth_bound(seq.size(), seq.size());
    const CountTrie trie(seq, alphabet.size(), depth);
    const SingleFit fit = fit_single(trie, PenaltyConfig{a.lambda}, depth);
    out << model_file_to_json(to_model_file(alphabet, fit)).dump(2) << '\n';
    return 0;
}

int cmd_fit_joint(const FitArgs& a, std::ostream& out) {
    const auto [seqs, alphabet] = load_pair(
        a.input, a.input_y, a.supplied_alphabet(),
        a.char_mode ? SeqFileMode::chars : SeqFileMode::tokenized);
    const int depth = a.depth >= 0 ? a.depth : default_depth_bound(seqs.first.size(), seqs.second.size());
    const CountTrie tx(seqs.first, alphabet.size(), depth);
    const CountTrie ty(seqs.second, alphabet.size(), depth);
    const EstimationResult result = fit_joint(tx, ty, PenaltyConfig{a.lambda}, depth, a.scores);
    nlohmann::ordered_json j = model_file_to_json(to_model_file(alphabet, result));
    if (a.scores && result.scores.has_value())
        j["scores"] = score_table_to_json(*result.scores, alphabet);
    out << j.dump(2) << '\n';
    return 0;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"joint context-tree estimation for paired sequence data"};
    app.require_subcommand(1);

    FitArgs fit_args;
    auto* fit = app.add_subcommand("fit", "fit a single context tree by penalized likelihood");
    fit->add_option("-i,--input", fit_args.input, "sequence file")->required();
    fit->add_option("--depth", fit_args.depth, "maximum context length");
    fit->add_option("--lambda", fit_args.lambda, "penalty multiplier");
    fit->add_option("--alphabet", fit_args.alphabet, "whitespace-separated symbol tokens");
    fit->add_flag("--char", fit_args.char_mode, "one symbol per character");

    FitArgs joint_args;
    auto* fj = app.add_subcommand("fit-joint", "jointly fit two context trees with shared contexts");
    fj->add_option("-x", joint_args.input, "first sequence file")->required();
    fj->add_option("-y", joint_args.input_y, "second sequence file")->required();
    fj->add_option("--depth", joint_args.depth, "maximum context length");
    fj->add_option("--lambda", joint_args.lambda, "penalty multiplier");
    fj->add_option("--alphabet", joint_args.alphabet, "whitespace-separated symbol tokens");
    fj->add_flag("--char", joint_args.char_mode, "one symbol per character");
    fj->add_flag("--scores", joint_args.scores, "include the recursion score table");

    std::string model_path, out_path;
    std::uint64_t sample_seed = 1;
    std::size_t sample_n = 0;
    auto* smp = app.add_subcommand("sample", "sample a sequence from a model");
    smp->add_option("-m,--model", model_path, "model JSON")->required();
    smp->add_option("-n", sample_n, "sequence length")->required();
    smp->add_option("--seed", sample_seed, "RNG seed");
    smp->add_option("-o,--output", out_path, "output sequence file")->required();

    std::string kl_p, kl_q;
    auto* kl = app.add_subcommand("kl", "divergence rate between two models (bits/symbol)");
    kl->add_option("-p", kl_p, "reference model JSON")->required();
    kl->add_option("-q", kl_q, "approximating model JSON")->required();

    std::string config_path, csv_path;
    int jobs = 1;
    bool sweep = false;
    auto* exp = app.add_subcommand("experiment", "Monte-Carlo comparison of joint and separate fits");
    exp->add_option("-c,--config", config_path, "experiment config JSON")->required();
    exp->add_option("--jobs", jobs, "worker threads");
    exp->add_option("-o,--output", out_path, "report JSON file");
    exp->add_option("--per-rep-csv", csv_path, "per-replication CSV log");
    exp->add_flag("--sweep-lambda", sweep, "sweep the penalty multiplier grid instead");

    std::string cb_config;
    int cb_jobs = 1;
    auto* cb = app.add_subcommand("compare-baseline", "print the method comparison table");
    cb->add_option("-c,--config", cb_config, "experiment config JSON")->required();
    cb->add_option("--jobs", cb_jobs, "worker threads");

    std::string dot_model, dot_out;
    auto* dot = app.add_subcommand("export-dot", "render a model as a DOT graph");
    dot->add_option("-m,--model", dot_model, "model JSON")->required();
    dot->add_option("-o,--output", dot_out, "output DOT file")->required();

    std::vector<const char*> argv;
    argv.push_back("vlmctree");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        if (fit->parsed()) return cmd_fit(fit_args, out);
        if (fj->parsed()) return cmd_fit_joint(joint_args, out);
        if (smp->parsed()) {
            if (sample_n == 0) throw std::runtime_error("sample length must be >= 1");
            const ProbabilisticContextTree model = to_model(model_file_from_json(load_json_file(model_path)));
            write_sequence(out_path, sample(model, sample_n, sample_seed), model.alphabet);
            return 0;
        }
        if (kl->parsed()) {
            const auto p = to_model(model_file_from_json(load_json_file(kl_p)));
            const auto q = to_model(model_file_from_json(load_json_file(kl_q)));
            char buf[48];
            std::snprintf(buf, sizeof buf, "%.10g\n", kl_rate(p, q));
            out << buf;
            return 0;
        }
        if (exp->parsed()) {
            ExperimentConfig config = config_from_json(load_json_file(config_path));
            config.base_seed = seed_override(config.base_seed);
            if (sweep) {
                const auto curve = sweep_lambda(config, jobs);
                nlohmann::ordered_json j;
                j["sweep"] = nlohmann::ordered_json::array();
                for (const auto& [lambda, freq] : curve) {
                    nlohmann::ordered_json row;
                    row["lambda"] = round_sig(lambda);
                    row["correct_freq"] = round_sig(freq);
                    j["sweep"].push_back(std::move(row));
                    char buf[64];
                    std::snprintf(buf, sizeof buf, "lambda %-8g correct %6.1f%%\n", lambda,
                                  100.0 * freq);
                    out << buf;
                }
                if (!out_path.empty()) write_json_file(out_path, j);
                return 0;
            }
            std::ofstream csv;
            if (!csv_path.empty()) {
                csv.open(csv_path, std::ios::binary);
                if (!csv) throw std::runtime_error("cannot open CSV file: " + csv_path);
            }
            const ExperimentReport report =
                run_experiment(config, jobs, csv.is_open() ? &csv : nullptr);
            const nlohmann::ordered_json j = report_to_json(report);
            if (!out_path.empty()) {
                write_json_file(out_path, j);
                out << report_table(report);
            } else {
                out << j.dump(2) << '\n';
            }
            return 0;
        }
        if (cb->parsed()) {
            ExperimentConfig config = config_from_json(load_json_file(cb_config));
            config.base_seed = seed_override(config.base_seed);
            out << report_table(run_experiment(config, cb_jobs));
            return 0;
        }
        if (dot->parsed()) {
            const ModelFile file = model_file_from_json(load_json_file(dot_model));
            std::ofstream os(dot_out, std::ios::binary);
            if (!os) throw std::runtime_error("cannot open output file: " + dot_out);
            export_dot(file, os);
            return 0;
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    err << "error: no subcommand dispatched\n";
    return 1;
}

} // namespace vlmc
