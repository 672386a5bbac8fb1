#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dkgraph/dkgraph.hpp"

using namespace dkgraph;
using nlohmann::json;

namespace {

constexpr int kExitArgs = 1;
constexpr int kExitValidation = 2;
constexpr int kExitCap = 3;

struct Globals {
    std::uint64_t seed = 0;
    std::vector<std::string> params;
    std::string out;
    std::uint64_t reps = 1;
    std::string format = "json";
};

struct Locals {
    std::optional<int> k;
    int steps = 64;
    std::size_t points = 4;
    std::size_t c = 1;
    std::uint64_t cap = 0;
    std::vector<double> m_grid{0, 1, 2, 5, 10, 20, 50};
    std::string target;
    int perm = 0;
    bool multigraph = false;
    std::optional<double> until;
    std::string manifest;
};

// One output file: either JSON lines or a CSV table.
struct Result {
    std::vector<json> records;
    std::optional<StatTable> table;
    std::vector<std::uint64_t> streams{0};
    json extra = json::object();
};

std::string csv_cell(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_float()) return format_double(v.get<double>());
    if (v.is_number() || v.is_boolean()) return v.dump();
    std::string s = v.dump();
    std::string quoted = "\"";
    for (char ch : s) quoted += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return quoted + "\"";
}

std::string render(const Result& r, const std::string& format) {
    if (r.table) return format == "csv" ? r.table->csv() : r.table->json().dump() + "\n";
    std::string out;
    if (format == "csv") {
        if (r.records.empty()) return out;
        std::vector<std::string> cols;
        for (const auto& [key, v] : r.records.front().items()) cols.push_back(key);
        for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + cols[i];
        out += '\n';
        for (const auto& rec : r.records) {
            for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? "," : "") + csv_cell(rec.value(cols[i], json()));
            out += '\n';
        }
        return out;
    }
    for (const auto& rec : r.records) out += rec.dump() + "\n";
    return out;
}

json load_json(const std::string& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::exception& e) {
        fail(ErrorCode::ParseError, path + ": " + e.what());
    }
}

const std::string& single_param(const Globals& g) {
    if (g.params.size() != 1) fail(ErrorCode::InvalidParameter, "expected exactly one --params file");
    return g.params.front();
}

// Tree-kind files may carry a separate "k"; surplus-kind files carry their own.
std::pair<DegreeSequence, int> load_dk(const json& j, std::optional<int> k_override) {
    json copy = j;
    int k = 0;
    if (copy.value("kind", std::string("tree")) == "tree") {
        k = copy.value("k", 0);
        copy.erase("k");
    }
    auto d = degree_sequence_from_json(copy);
    if (d.kind() == SequenceKind::surplus) k = d.surplus();
    if (k_override) k = *k_override;
    return {d, k};
}

ModelSpec load_model(const json& j, Scaling& scaling) {
    const std::string s = j.value("scaling", std::string());
    if (j.contains("degrees")) {
        auto [d, k] = load_dk(j, std::nullopt);
        scaling = s == "none" ? Scaling::none : Scaling::lambda_d;
        return DkGraphModel{d.kind() == SequenceKind::surplus ? d.as_tree() : d, k};
    }
    if (j.contains("p")) {
        scaling = s == "none" ? Scaling::none : Scaling::sigma_p;
        return PkGraphModel{p_vector_from_json(j), j.value("k", 0), j.value("steps", 64)};
    }
    scaling = Scaling::none;
    return IcrgModel{theta_vector_from_json(j), j.value("k", 0)};
}

json metric_tree_json(const MetricTree& t) {
    json nodes = json::array();
    for (std::size_t v = 1; v < t.node_count(); ++v) {
        nodes.push_back({{"id", v}, {"parent", t.parent(static_cast<int>(v))}, {"length", t.length(static_cast<int>(v))}});
    }
    json marks = json::object();
    for (std::size_t i = 0; i < t.mark_count(); ++i) marks[t.mark_names()[i]] = t.mark_node(i);
    return {{"edges", nodes}, {"marks", marks}, {"total_length", t.total_length()}};
}

json matrix_json(const Matrix<double>& m) {
    json out = json::array();
    for (const auto& row : m) out.push_back(row);
    return out;
}

Result cmd_sample_tree(const Globals& g, const Locals& l, Rng& rng) {
    const json j = load_json(single_param(g));
    Result r;
    if (j.contains("p")) {
        const auto p = p_vector_from_json(j);
        for (std::uint64_t i = 0; i < g.reps; ++i) {
            const auto prefix = sample_p_tree_prefix(p, l.steps, rng);
            r.records.push_back({{"rep", i}, {"tree", to_json(prefix.tree)}});
        }
        return r;
    }
    const auto d = degree_sequence_from_json(j);
    require_tree_kind(d);
    for (std::uint64_t i = 0; i < g.reps; ++i) r.records.push_back({{"rep", i}, {"tree", to_json(sample_d_tree(d, rng))}});
    return r;
}

Result cmd_sample_graph(const Globals& g, const Locals& l, Rng& rng) {
    const json j = load_json(single_param(g));
    Result r;
    if (j.contains("p")) {
        const auto p = p_vector_from_json(j);
        const int k = l.k.value_or(j.value("k", 0));
        RejectionStats stats;
        for (std::uint64_t i = 0; i < g.reps; ++i) {
            r.records.push_back({{"rep", i}, {"graph", to_json(sample_pk_graph_prefix(p, k, l.steps, rng, &stats))}});
        }
        return r;
    }
    const auto [d, k] = load_dk(j, l.k);
    if (d.kind() == SequenceKind::half_edge) {
        HalfEdgeDkSampler sampler(d);
        for (std::uint64_t i = 0; i < g.reps; ++i) r.records.push_back({{"rep", i}, {"graph", to_json(sampler.sample(rng))}});
        r.extra["iterations"] = sampler.sampler().stats().iterations;
        return r;
    }
    DkSampler sampler(d, k);
    for (std::uint64_t i = 0; i < g.reps; ++i) r.records.push_back({{"rep", i}, {"graph", to_json(sampler.sample(rng))}});
    r.extra["iterations"] = sampler.stats().iterations;
    return r;
}

Result cmd_sample_cm(const Globals& g, const Locals&, Rng& rng) {
    const auto d = degree_sequence_from_json(load_json(single_param(g)));
    if (d.kind() != SequenceKind::half_edge) fail(ErrorCode::InvalidParameter, "sample-cm needs a half-edge sequence");
    Result r;
    for (std::uint64_t i = 0; i < g.reps; ++i) {
        r.records.push_back({{"rep", i}, {"graph", to_json(sample_configuration_model(d, rng))}});
    }
    return r;
}

Result cmd_sample_mult(const Globals& g, const Locals& l, Rng& rng) {
    const json j = load_json(single_param(g));
    MultiplicativeParams w;
    try {
        w.lambda = j.at("lambda").get<double>();
        w.weights = j.at("weights").get<std::vector<double>>();
    } catch (const json::exception& e) {
        fail(ErrorCode::ParseError, e.what());
    }
    Result r;
    for (std::uint64_t i = 0; i < g.reps; ++i) {
        const auto graph = l.multigraph ? sample_multiplicative_multigraph(w, rng) : sample_multiplicative_graph(w, rng);
        r.records.push_back({{"rep", i}, {"graph", to_json(graph)}});
    }
    return r;
}

Result cmd_sample_icrt(const Globals& g, const Locals& l, Rng& rng) {
    const auto theta = theta_vector_from_json(load_json(single_param(g)));
    Result r;
    for (std::uint64_t i = 0; i < g.reps; ++i) {
        const auto real = l.until ? sample_icrt_until(theta, *l.until, rng) : sample_icrt(theta, l.points, rng);
        r.records.push_back({{"rep", i}, {"realization", to_json(real)}});
    }
    return r;
}

Result cmd_sample_icrg(const Globals& g, const Locals& l, Rng& rng) {
    const json j = load_json(single_param(g));
    const IcrgModel model{theta_vector_from_json(j), l.k.value_or(j.value("k", 0))};
    Result r;
    const auto samples = gp_matrix_sample(model, l.points, g.reps, Scaling::none, rng);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        r.records.push_back({{"rep", i}, {"weight", samples[i].weight}, {"matrix", matrix_json(samples[i].matrix)}});
    }
    return r;
}

Result cmd_reconstruct(const Globals& g, const Locals&, Rng&) {
    const auto nm = parse_matrix_csv(read_file(single_param(g)));
    const MetricTree t = reconstruct(nm.values);
    json tree = metric_tree_json(t);
    json names = json::object();
    for (std::size_t i = 0; i < nm.names.size(); ++i) names[nm.names[i]] = t.mark_node(i);
    tree["marks"] = names;
    Result r;
    r.records.push_back(tree);
    return r;
}

Result cmd_core_measure(const Globals& g, const Locals& l, Rng&) {
    const auto nm = parse_matrix_csv(read_file(single_param(g)));
    Result r;
    r.records.push_back({{"c", l.c}, {"value", core_measure_from_matrix(nm.values, l.c)}});
    return r;
}

std::string scaling_name(Scaling s) {
    switch (s) {
    case Scaling::none: return "none";
    case Scaling::lambda_d: return "lambda";
    case Scaling::sigma_p: return "sigma";
    }
    return "none";
}

Result cmd_converge(const Globals& g, const Locals& l, Rng&) {
    if (g.params.empty()) fail(ErrorCode::InvalidParameter, "converge needs at least one --params file");
    if (l.target.empty()) fail(ErrorCode::InvalidParameter, "converge needs --target");
    std::vector<FamilyMember> family;
    for (const auto& path : g.params) {
        FamilyMember m{std::filesystem::path(path).filename().string(), {}, Scaling::none};
        m.model = load_model(load_json(path), m.scaling);
        family.push_back(std::move(m));
    }
    FamilyMember target{std::filesystem::path(l.target).filename().string(), {}, Scaling::none};
    target.model = load_model(load_json(l.target), target.scaling);
    ConvergeOptions opt;
    opt.n_points = l.points;
    opt.n_reps = g.reps;
    opt.n_perm = l.perm;
    const auto report = converge_experiment(family, target, opt, g.seed);

    StatTable table({"member", "scaling", "energy", "ks_max", "ks_mean", "perm_p", "perm_threshold95"});
    table.meta("statistic", "weighted energy distance on upper-triangle entries; per-entry KS");
    table.meta("target", target.label);
    table.meta("points", std::to_string(opt.n_points));
    table.meta("reps", std::to_string(opt.n_reps));
    table.meta("strictly_decreasing", report.strictly_decreasing ? "true" : "false");
    table.meta("measure", "uniform on non-glued stars; cut points for continuum targets");
    table.meta("caveat", "compactness hypotheses are not certified");
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        const auto& d = report.rows[i].discrepancy;
        table.row({report.rows[i].label, scaling_name(family[i].scaling), format_double(d.energy), format_double(d.ks_max),
                   format_double(d.ks_mean), format_double(d.perm_p), format_double(d.perm_threshold95)});
    }
    Result r;
    r.table = std::move(table);
    r.streams = report.streams;
    r.extra["strictly_decreasing"] = report.strictly_decreasing;
    return r;
}

Result cmd_bias_tail(const Globals& g, const Locals& l, Rng& rng) {
    auto [d, k] = load_dk(load_json(single_param(g)), l.k);
    if (d.kind() == SequenceKind::surplus) d = d.as_tree();
    const auto rows = bias_tail_experiment(d, k, l.m_grid, g.reps, rng);
    StatTable table({"m", "mean", "se"});
    table.meta("statistic", "E[h_m(bias / lambda^k)] over unbiased D-trees");
    table.meta("k", std::to_string(k));
    table.meta("lambda", format_double(d.stats().lambda));
    table.meta("reps", std::to_string(g.reps));
    for (const auto& row : rows) table.row({format_double(row.m), format_double(row.value.mean), format_double(row.value.se)});
    Result r;
    r.table = std::move(table);
    return r;
}

Result cmd_enumerate(const Globals& g, const Locals& l, Rng&) {
    const auto d = degree_sequence_from_json(load_json(single_param(g)));
    Result r;
    std::uint64_t i = 0;
    enumerate_d_trees(
        d, [&](const LabeledTree& t) { r.records.push_back({{"index", i++}, {"tree", to_json(t)}}); },
        l.cap ? l.cap : 100'000);
    r.extra["count"] = i;
    return r;
}

Result cmd_cm_law(const Globals& g, const Locals& l, Rng&) {
    const auto d = degree_sequence_from_json(load_json(single_param(g)));
    const long long cap = l.cap ? static_cast<long long>(l.cap) : kMatchingSumCap;
    Result r;
    if (l.k) {
        for (const auto& [graph, p] : cm_conditioned_oracle(d, *l.k, cap)) {
            r.records.push_back({{"graph", to_json(graph)}, {"probability", p.str()}, {"value", p.convert_to<double>()}});
        }
    } else {
        for (const auto& [graph, count] : cm_matching_law(d, cap)) {
            r.records.push_back({{"graph", to_json(graph)}, {"matchings", count.str()}});
        }
    }
    return r;
}

Result cmd_pk_law(const Globals& g, const Locals& l, Rng&) {
    const json j = load_json(single_param(g));
    const auto p = p_vector_from_json(j);
    Result r;
    for (const auto& [graph, prob] : pk_law_oracle(p, l.k.value_or(j.value("k", 0)), l.cap ? l.cap : kPkOracleCap)) {
        r.records.push_back({{"graph", to_json(graph)}, {"probability", prob}});
    }
    return r;
}

int exit_code_for(ErrorCode code) {
    return code == ErrorCode::TooLarge ? kExitCap : kExitValidation;
}

int run(std::vector<std::string> args);

int rerun(const Locals& l, const std::string& out) {
    json m;
    try {
        m = load_json(l.manifest);
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return kExitValidation;
    }
    for (const auto& entry : m.value("params", json::array())) {
        const std::string file = entry.value("file", std::string());
        if (fnv1a_hex(read_file(file)) != entry.value("fnv1a64", std::string())) {
            std::cerr << "parameter file changed since the manifest was written: " << file << "\n";
            return kExitValidation;
        }
    }
    auto args = m.value("argv", std::vector<std::string>{});
    if (!out.empty()) {
        args.push_back("--out");
        args.push_back(out);
    }
    return run(args);
}

int run(std::vector<std::string> args) {
    CLI::App app{"Random graphs with given degrees and small surplus: samplers, oracles, experiments"};
    app.fallthrough();
    app.require_subcommand(1);
    Globals g;
    Locals l;
    app.add_option("--seed", g.seed, "master seed");
    app.add_option("--params", g.params, "parameter file (repeat for families)");
    app.add_option("--out", g.out, "output directory; stdout when omitted");
    app.add_option("--reps", g.reps, "number of samples or Monte Carlo repetitions")->check(CLI::PositiveNumber);
    app.add_option("--format", g.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

    using Handler = Result (*)(const Globals&, const Locals&, Rng&);
    std::vector<std::pair<CLI::App*, Handler>> handlers;
    auto add = [&](CLI::App* parent, const std::string& name, const std::string& help, Handler h) {
        CLI::App* sub = parent->add_subcommand(name, help);
        sub->fallthrough();
        handlers.emplace_back(sub, h);
        return sub;
    };
    auto k_opt = [&](CLI::App* sub) { sub->add_option("--k", l.k, "surplus"); };
    auto steps_opt = [&](CLI::App* sub) { sub->add_option("--steps", l.steps, "prefix length for P models"); };
    auto points_opt = [&](CLI::App* sub) { sub->add_option("--points", l.points, "number of sampled points"); };
    auto cap_opt = [&](CLI::App* sub) { sub->add_option("--cap", l.cap, "enumeration cap"); };

    steps_opt(add(&app, "sample-tree", "D-trees or P-tree prefixes", cmd_sample_tree));
    auto* graph = add(&app, "sample-graph", "(D,k)-graphs or (P,k)-graph prefixes", cmd_sample_graph);
    k_opt(graph);
    steps_opt(graph);
    add(&app, "sample-cm", "configuration model multigraphs", cmd_sample_cm);
    add(&app, "sample-mult", "multiplicative random graphs", cmd_sample_mult)
        ->add_flag("--multigraph", l.multigraph, "Poisson multiplicities instead of simple edges");
    auto* icrt = add(&app, "sample-icrt", "ICRT cut and anchor points", cmd_sample_icrt);
    points_opt(icrt);
    icrt->add_option("--until", l.until, "sample all cuts below this height");
    auto* icrg = add(&app, "sample-icrg", "weighted ICRG distance matrices", cmd_sample_icrg);
    k_opt(icrg);
    points_opt(icrg);
    add(&app, "reconstruct", "tree metric from a distance CSV", cmd_reconstruct);
    add(&app, "core-measure", "f_c of a distance CSV", cmd_core_measure)->add_option("--c", l.c, "number of pairs");

    CLI::App* experiment = app.add_subcommand("experiment", "Monte Carlo experiments");
    experiment->fallthrough();
    experiment->require_subcommand(1);
    auto* conv = add(experiment, "converge", "discrepancy of a family to a target", cmd_converge);
    points_opt(conv);
    conv->add_option("--target", l.target, "target parameter file")->required();
    conv->add_option("--perm", l.perm, "permutations for the last member");
    auto* tail = add(experiment, "bias-tail", "bias tail means", cmd_bias_tail);
    k_opt(tail);
    tail->add_option("--m", l.m_grid, "thresholds");

    CLI::App* oracle = app.add_subcommand("oracle", "exact enumeration oracles");
    oracle->fallthrough();
    oracle->require_subcommand(1);
    cap_opt(add(oracle, "enumerate-trees", "every D-tree", cmd_enumerate));
    auto* cm = add(oracle, "cm-law", "configuration-model law", cmd_cm_law);
    k_opt(cm);
    cap_opt(cm);
    auto* pk = add(oracle, "pk-law", "(P,k) law of small multigraphs", cmd_pk_law);
    k_opt(pk);
    cap_opt(pk);

    CLI::App* again = app.add_subcommand("rerun", "repeat the command recorded in a manifest");
    again->fallthrough();
    again->add_option("--manifest", l.manifest, "manifest.json")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitArgs;
    }
    if (again->parsed()) return rerun(l, g.out);

    CLI::App* chosen = nullptr;
    Handler handler = nullptr;
    for (const auto& [sub, h] : handlers) {
        if (sub->parsed()) {
            chosen = sub;
            handler = h;
        }
    }
    if (!handler) {
        std::cerr << app.help();
        return kExitArgs;
    }
    std::string name = chosen->get_name();
    if (chosen->get_parent() != &app) name = chosen->get_parent()->get_name() + "-" + name;

    try {
        Rng rng = Rng::stream(g.seed, 0);
        Result r = handler(g, l, rng);
        const std::string text = render(r, g.format);
        if (g.out.empty()) {
            std::cout << text;
            return 0;
        }
        std::filesystem::create_directories(g.out);
        const std::string ext = r.table ? (g.format == "csv" ? ".csv" : ".json") : (g.format == "csv" ? ".csv" : ".jsonl");
        write_file((std::filesystem::path(g.out) / (name + ext)).string(), text);

        ExperimentManifest m;
        m.experiment = name;
        for (std::size_t i = 0; i < args.size(); ++i) {
            if (args[i] == "--out") {
                ++i;
                continue;
            }
            if (args[i].rfind("--out=", 0) == 0) continue;
            m.argv.push_back(args[i]);
        }
        for (const auto& p : g.params) m.param_hashes.emplace_back(p, fnv1a_hex(read_file(p)));
        if (!l.target.empty()) m.param_hashes.emplace_back(l.target, fnv1a_hex(read_file(l.target)));
        m.seed = g.seed;
        m.reps = g.reps;
        m.streams = r.streams;
        m.extra = r.extra;
        m.extra["output"] = name + ext;
        m.extra["output_fnv1a64"] = fnv1a_hex(text);
        write_file((std::filesystem::path(g.out) / "manifest.json").string(), m.json().dump(2) + "\n");
        return 0;
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << e.what() << "\n";
        return kExitArgs;
    }
}

} // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args);
}
