#ifndef MASHSPUD_TOOLS_HARNESS_HPP
#define MASHSPUD_TOOLS_HARNESS_HPP

#include "mashspud/mashspud.hpp"
#include "svg.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

/**
 * @file harness.hpp
 *
 * @brief Run configuration, method dispatch and artifact writers behind the command-line tool.
 */

namespace mashspud::tools {

using nlohmann::json;
namespace fs = std::filesystem;

inline const std::vector<std::string> kMethods{"spud", "mash", "mash_minus", "nama", "jlma", "mapa"};

/// Raised for invalid configurations; reported as `config_error`.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MethodConfigs {
    KernelParams kernel;
    GeodesicConfig spud;
    MashConfig mash;
};

/**
 * @brief One alignment job, or the shared settings of a benchmark grid.
 */
struct RunConfig {
    std::string dataset;
    std::string dataset_x;
    std::string dataset_y;
    std::string anchors_file;
    /// Full ground-truth correspondence for explicit inputs (enables FOSCTTM).
    std::string pairs_file;
    std::string label_column = "label";
    std::string importance_file;

    std::string method = "mash";
    AdaptationKind adaptation = AdaptationKind::random;
    double anchor_fraction = 0.2;
    double noise_scale = 0.05;
    std::optional<int> dim;
    int ce_k = 5;
    std::vector<std::uint64_t> seeds;
    int repetitions = 1;
    std::uint64_t seed = 0;
    int jobs = 1;
    std::string out = "out";

    // Transfer recipe.
    int n_top = 4;
    double row_fraction = 0.1;

    // Benchmark grid.
    std::vector<std::string> datasets;
    std::vector<AdaptationKind> adaptations;
    std::vector<double> anchor_fractions;
    std::vector<std::string> methods;

    MethodConfigs methods_cfg;

    bool explicit_inputs() const { return !dataset_x.empty() || !dataset_y.empty(); }

    /// Seeds in use: the explicit list, else `repetitions` consecutive seeds from `seed`.
    std::vector<std::uint64_t> run_seeds() const {
        if (!seeds.empty()) {
            return seeds;
        }
        std::vector<std::uint64_t> out_seeds;
        for (int r = 0; r < repetitions; ++r) {
            out_seeds.push_back(seed + static_cast<std::uint64_t>(r));
        }
        return out_seeds;
    }
};

namespace detail {

template <typename T>
void read_if(const json& j, const char* key, T& dst) {
    if (j.contains(key) && !j.at(key).is_null()) {
        dst = j.at(key).get<T>();
    }
}

inline void check_method(const std::string& m) {
    if (std::find(kMethods.begin(), kMethods.end(), m) == kMethods.end()) {
        throw ConfigError("unknown method: " + m);
    }
}

inline Metric metric_from_string(const std::string& s) {
    if (s == "euclidean") {
        return Metric::euclidean;
    }
    if (s == "manhattan") {
        return Metric::manhattan;
    }
    throw ConfigError("unknown metric: " + s);
}

inline std::string to_string(Metric m) {
    return m == Metric::euclidean ? "euclidean" : "manhattan";
}

inline std::string to_string(Aggregation a) {
    switch (a) {
    case Aggregation::min: return "min";
    case Aggregation::max: return "max";
    case Aggregation::mean: return "mean";
    case Aggregation::abs_diff: return "abs_diff";
    }
    return "min";
}

inline std::string to_string(GeodesicMode m) {
    switch (m) {
    case GeodesicMode::nearest_anchor: return "nearest_anchor";
    case GeodesicMode::all_anchors: return "all_anchors";
    case GeodesicMode::dense_nama: return "dense_nama";
    }
    return "nearest_anchor";
}

inline std::string format_double(double v) {
    std::ostringstream s;
    s << std::setprecision(17) << v;
    return s.str();
}

} // namespace detail

/// Fills `cfg` from a JSON document; absent keys keep their current values.
inline void apply_json(RunConfig& cfg, const json& j) {
    if (!j.is_object()) {
        throw ConfigError("config must be a JSON object");
    }
    try {
        detail::read_if(j, "dataset", cfg.dataset);
        detail::read_if(j, "dataset_x", cfg.dataset_x);
        detail::read_if(j, "dataset_y", cfg.dataset_y);
        detail::read_if(j, "anchors_file", cfg.anchors_file);
        detail::read_if(j, "pairs_file", cfg.pairs_file);
        detail::read_if(j, "label_column", cfg.label_column);
        detail::read_if(j, "importance_file", cfg.importance_file);
        detail::read_if(j, "method", cfg.method);
        if (j.contains("adaptation")) {
            cfg.adaptation = adaptation_from_string(j.at("adaptation").get<std::string>());
        }
        detail::read_if(j, "anchor_fraction", cfg.anchor_fraction);
        detail::read_if(j, "noise_scale", cfg.noise_scale);
        if (j.contains("dim") && !j.at("dim").is_null()) {
            cfg.dim = j.at("dim").get<int>();
        }
        detail::read_if(j, "ce_k", cfg.ce_k);
        detail::read_if(j, "seeds", cfg.seeds);
        detail::read_if(j, "repetitions", cfg.repetitions);
        detail::read_if(j, "seed", cfg.seed);
        detail::read_if(j, "jobs", cfg.jobs);
        detail::read_if(j, "out", cfg.out);
        detail::read_if(j, "n_top", cfg.n_top);
        detail::read_if(j, "row_fraction", cfg.row_fraction);
        detail::read_if(j, "datasets", cfg.datasets);
        if (j.contains("adaptations")) {
            cfg.adaptations.clear();
            for (const auto& a : j.at("adaptations")) {
                cfg.adaptations.push_back(adaptation_from_string(a.get<std::string>()));
            }
        }
        detail::read_if(j, "anchor_fractions", cfg.anchor_fractions);
        detail::read_if(j, "methods", cfg.methods);

        auto& m = cfg.methods_cfg;
        if (j.contains("kernel")) {
            const auto& k = j.at("kernel");
            detail::read_if(k, "k", m.kernel.k);
            detail::read_if(k, "alpha", m.kernel.alpha);
            if (k.contains("metric")) {
                m.kernel.metric = detail::metric_from_string(k.at("metric").get<std::string>());
            }
        }
        if (j.contains("spud")) {
            const auto& s = j.at("spud");
            if (s.contains("aggregation")) {
                m.spud.aggregation = aggregation_from_string(s.at("aggregation").get<std::string>());
            }
            if (s.contains("mode")) {
                m.spud.mode = geodesic_mode_from_string(s.at("mode").get<std::string>());
            }
            detail::read_if(s, "use_info_distance", m.spud.use_info_distance);
            detail::read_if(s, "nu", m.spud.nu);
        }
        if (j.contains("mash")) {
            const auto& s = j.at("mash");
            if (s.contains("info_distance")) {
                m.mash.info_distance = info_distance_from_string(s.at("info_distance").get<std::string>());
            }
            detail::read_if(s, "eta", m.mash.eta);
            detail::read_if(s, "max_iterations", m.mash.max_iterations);
            detail::read_if(s, "max_new_per_iter", m.mash.max_new_per_iter);
            detail::read_if(s, "holdout_fraction", m.mash.holdout_fraction);
            if (s.contains("t_override")) {
                m.mash.t_override = s.at("t_override").is_null() ? std::nullopt : std::optional<int>(s.at("t_override").get<int>());
            }
            detail::read_if(s, "t_max", m.mash.t_max);
            if (s.contains("knee_rule")) {
                m.mash.knee_rule = knee_rule_from_string(s.at("knee_rule").get<std::string>());
            }
            detail::read_if(s, "nu", m.mash.nu);
            detail::read_if(s, "gamma", m.mash.gamma);
            detail::read_if(s, "restore_holdout", m.mash.restore_holdout);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad config value: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config " + path);
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path + " is not valid JSON: " + e.what());
    }
    RunConfig cfg;
    apply_json(cfg, j);
    return cfg;
}

/// Echo of the settings that shape a run.
inline json to_json(const RunConfig& cfg) {
    const auto& m = cfg.methods_cfg;
    json j;
    j["method"] = cfg.method;
    j["adaptation"] = to_string(cfg.adaptation);
    j["anchor_fraction"] = cfg.anchor_fraction;
    j["noise_scale"] = cfg.noise_scale;
    j["dim"] = cfg.dim ? json(*cfg.dim) : json(nullptr);
    j["ce_k"] = cfg.ce_k;
    j["kernel"] = {{"k", m.kernel.k}, {"alpha", m.kernel.alpha}, {"metric", detail::to_string(m.kernel.metric)}};
    j["spud"] = {{"aggregation", detail::to_string(m.spud.aggregation)},
                 {"mode", detail::to_string(m.spud.mode)},
                 {"use_info_distance", m.spud.use_info_distance},
                 {"nu", m.spud.nu}};
    j["mash"] = {{"info_distance", to_string(m.mash.info_distance)},
                 {"eta", m.mash.eta},
                 {"max_iterations", m.mash.max_iterations},
                 {"max_new_per_iter", m.mash.max_new_per_iter},
                 {"holdout_fraction", m.mash.holdout_fraction},
                 {"t_override", m.mash.t_override ? json(*m.mash.t_override) : json(nullptr)},
                 {"t_max", m.mash.t_max},
                 {"knee_rule", to_string(m.mash.knee_rule)},
                 {"nu", m.mash.nu},
                 {"gamma", m.mash.gamma},
                 {"restore_holdout", m.mash.restore_holdout}};
    return j;
}

/**
 * @brief A prepared pair plus what is known about its ground truth.
 */
struct PreparedPair {
    DomainPair pair;
    /// Full correspondence used for FOSCTTM; empty when unknown.
    AnchorList truth;
    std::string name;
};

inline int default_dim(const DomainPair& pair) {
    return static_cast<int>(std::min(pair.x.cols(), pair.y.cols()));
}

inline bool csv_has_column(const std::string& path, const std::string& column) {
    std::ifstream in(path);
    std::string line;
    if (!in || !std::getline(in, line)) {
        throw std::runtime_error("cannot open " + path);
    }
    for (auto& h : mashspud::detail::split_csv_line(line)) {
        if (mashspud::detail::trim(h) == column) {
            return true;
        }
    }
    return false;
}

inline void require_file(const std::string& path, const char* what) {
    if (path.empty()) {
        throw ConfigError(std::string("missing ") + what);
    }
    if (!fs::exists(path)) {
        throw std::runtime_error(std::string(what) + " not found: " + path);
    }
}

inline DataMatrix load_dataset(const std::string& path, const std::string& label_column, bool require_labels) {
    require_file(path, "dataset");
    const bool labelled = csv_has_column(path, label_column);
    if (require_labels && !labelled) {
        throw std::runtime_error(path + ": label column '" + label_column + "' not in header");
    }
    return load_csv(path, labelled ? std::optional<std::string>(label_column) : std::nullopt);
}

inline ImportanceOracle importance_oracle(const RunConfig& cfg) {
    if (cfg.importance_file.empty()) {
        return {};
    }
    require_file(cfg.importance_file, "importance_file");
    return ranking_oracle(load_ranking_file(cfg.importance_file));
}

/// Builds the domain pair for one seed, from an adaptation or from explicit files.
inline PreparedPair prepare_pair(const RunConfig& cfg, const std::string& dataset, AdaptationKind kind, double fraction,
                                 std::uint64_t seed) {
    PreparedPair out;
    if (cfg.explicit_inputs()) {
        require_file(cfg.dataset_x, "dataset_x");
        require_file(cfg.dataset_y, "dataset_y");
        require_file(cfg.anchors_file, "anchors_file");
        auto load = [&](const std::string& path) {
            const bool labelled = csv_has_column(path, cfg.label_column);
            return load_csv(path, labelled ? std::optional<std::string>(cfg.label_column) : std::nullopt, true, false);
        };
        out.pair.x = load(cfg.dataset_x);
        out.pair.y = load(cfg.dataset_y);
        out.pair.anchors = load_anchor_file(cfg.anchors_file);
        validate(out.pair);
        if (!cfg.pairs_file.empty()) {
            require_file(cfg.pairs_file, "pairs_file");
            out.truth = load_anchor_file(cfg.pairs_file);
            validate_anchors(out.truth, out.pair.n_x(), out.pair.n_y());
        }
        out.name = fs::path(cfg.dataset_x).stem().string() + "+" + fs::path(cfg.dataset_y).stem().string();
        return out;
    }
    const bool needs_labels = kind == AdaptationKind::skewed || kind == AdaptationKind::even;
    const DataMatrix data = load_dataset(dataset, cfg.label_column, needs_labels);
    AdaptationSpec spec;
    spec.kind = kind;
    spec.anchor_fraction = fraction;
    spec.seed = seed;
    spec.noise_scale = cfg.noise_scale;
    spec.importance = importance_oracle(cfg);
    out.pair = adapt(data, spec);
    out.truth = identity_pairs(out.pair.n_x());
    out.name = fs::path(dataset).stem().string();
    return out;
}

/// Runs one method on a prepared pair.
inline AlignmentResult run_method(const std::string& method, const DomainPair& pair, const MethodConfigs& m, int dim, std::uint64_t seed) {
    detail::check_method(method);
    if (method == "spud" || method == "nama") {
        GeodesicConfig g = m.spud;
        if (method == "nama") {
            g.mode = GeodesicMode::dense_nama;
        }
        return spud_align(pair, m.kernel, g, dim);
    }
    if (method == "mash" || method == "mash_minus") {
        MashConfig c = m.mash;
        if (method == "mash_minus") {
            c.max_iterations = 0;
        }
        return mash_align(pair, m.kernel, c, dim, RandomSource(seed).fork(4));
    }
    BaselineConfig b;
    b.dim = dim;
    b.kparams = m.kernel;
    return method == "jlma" ? jlma_align(pair, b) : mapa_align(pair, b);
}

/// Metrics against the known ground truth; missing pieces are null.
inline json metrics_json(const AlignmentResult& r, const PreparedPair& p, int ce_k) {
    json j;
    std::optional<double> fos, ce;
    if (!p.truth.empty()) {
        fos = foscttm(r.coords(), r.n_x, p.truth);
    }
    if (p.pair.x.labels && p.pair.y.labels && ce_k <= r.n_x) {
        ce = cross_embedding_accuracy(r.coords(), r.n_x, *p.pair.x.labels, *p.pair.y.labels, ce_k);
    }
    j["foscttm"] = fos ? json(*fos) : json(nullptr);
    j["ce_accuracy"] = ce ? json(*ce) : json(nullptr);
    j["combined"] = fos && ce ? json(combined_score(*ce, *fos)) : json(nullptr);
    j["n_eval_pairs"] = p.truth.size();
    j["ce_k"] = ce_k;
    j["dim"] = r.coords().cols();
    j["embedding_truncated"] = r.embedding.truncated;
    return j;
}

inline json diagnostics_json(const MashDiagnostics& d) {
    json j;
    j["t_selected"] = d.t_selected;
    j["vne_curve"] = d.vne_curve;
    j["iterations_run"] = d.iterations_run;
    j["reverted_iterations"] = d.reverted_iterations;
    j["training_anchors"] = d.training_anchors;
    json held = json::array();
    for (const auto& a : d.holdout_anchors) {
        held.push_back({a.x, a.y});
    }
    j["holdout_anchors"] = held;
    j["initial_holdout_foscttm"] = d.initial_holdout_foscttm;
    json its = json::array();
    json added_counts = json::array();
    json trace = json::array();
    for (const auto& it : d.iterations) {
        json added = json::array();
        for (const auto& a : it.added) {
            added.push_back({a.x, a.y});
        }
        its.push_back({{"t", it.t}, {"holdout_foscttm", it.holdout_foscttm}, {"accepted", it.accepted}, {"added", added}});
        added_counts.push_back(it.added.size());
        trace.push_back(it.holdout_foscttm);
    }
    j["iterations"] = its;
    j["connections_added"] = added_counts;
    j["holdout_foscttm_trace"] = trace;
    j["accepted_trace"] = d.accepted_trace();
    return j;
}

inline void write_embedding_csv(const std::string& path, const AlignmentResult& r) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
    const Matrix& c = r.coords();
    out << "id,domain";
    for (Eigen::Index k = 0; k < c.cols(); ++k) {
        out << ",c" << k;
    }
    out << '\n' << std::setprecision(17);
    for (Eigen::Index i = 0; i < c.rows(); ++i) {
        const bool in_x = i < r.n_x;
        out << (in_x ? i : i - r.n_x) << ',' << (in_x ? 'x' : 'y');
        for (Eigen::Index k = 0; k < c.cols(); ++k) {
            out << ',' << c(i, k);
        }
        out << '\n';
    }
}

inline void write_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
    out << j.dump(2) << '\n';
}

/// Artifacts of one alignment written into `dir`.
inline json write_run_artifacts(const std::string& dir, const RunConfig& cfg, const PreparedPair& p, const AlignmentResult& r,
                                std::uint64_t seed) {
    fs::create_directories(dir);
    write_embedding_csv((fs::path(dir) / "embedding.csv").string(), r);
    json metrics = metrics_json(r, p, cfg.ce_k);
    metrics["method"] = r.method;
    metrics["dataset"] = p.name;
    metrics["seed"] = seed;
    metrics["n_x"] = r.n_x;
    metrics["n_y"] = r.n_y;
    metrics["n_anchors"] = p.pair.anchors.size();
    metrics["config"] = to_json(cfg);
    write_json((fs::path(dir) / "metrics.json").string(), metrics);
    if (r.diagnostics) {
        write_json((fs::path(dir) / "diagnostics.json").string(), diagnostics_json(*r.diagnostics));
    }
    const std::vector<int>* lx = p.pair.x.labels ? &*p.pair.x.labels : nullptr;
    const std::vector<int>* ly = p.pair.y.labels ? &*p.pair.y.labels : nullptr;
    ScatterPlot().write((fs::path(dir) / "scatter.svg").string(), r, p.pair.anchors, lx, ly,
                        r.method + " on " + p.name + " (seed " + std::to_string(seed) + ")");
    return metrics;
}

/**
 * @brief `align` verb: one method, one dataset, every seed.
 *
 * A single seed writes straight into `cfg.out`; several seeds get `seed_<s>` subdirectories.
 */
inline json run_align(const RunConfig& cfg) {
    detail::check_method(cfg.method);
    if (!cfg.explicit_inputs() && cfg.dataset.empty()) {
        throw ConfigError("missing dataset (or dataset_x/dataset_y/anchors_file)");
    }
    const auto seeds = cfg.run_seeds();
    if (seeds.empty()) {
        throw ConfigError("repetitions must be at least 1");
    }
    json summary = json::array();
    for (auto s : seeds) {
        const PreparedPair p = prepare_pair(cfg, cfg.dataset, cfg.adaptation, cfg.anchor_fraction, s);
        const int dim = cfg.dim.value_or(default_dim(p.pair));
        const AlignmentResult r = run_method(cfg.method, p.pair, cfg.methods_cfg, dim, s);
        const std::string dir = seeds.size() == 1 ? cfg.out : (fs::path(cfg.out) / ("seed_" + std::to_string(s))).string();
        summary.push_back(write_run_artifacts(dir, cfg, p, r, s));
    }
    return summary;
}

/// One benchmark cell.
struct BenchmarkCell {
    std::string dataset;
    AdaptationKind adaptation;
    double anchor_fraction;
    std::string method;
    std::uint64_t seed;

    bool ok = false;
    std::string error;
    double foscttm = 0;
    double ce = 0;
    double combined = 0;
    double seconds = 0;
    int dim = 0;
};

inline std::vector<BenchmarkCell> benchmark_cells(const RunConfig& cfg) {
    std::vector<std::string> datasets = cfg.datasets;
    if (datasets.empty() && !cfg.dataset.empty()) {
        datasets.push_back(cfg.dataset);
    }
    auto adaptations = cfg.adaptations.empty() ? std::vector<AdaptationKind>{cfg.adaptation} : cfg.adaptations;
    auto fractions = cfg.anchor_fractions.empty() ? std::vector<double>{cfg.anchor_fraction} : cfg.anchor_fractions;
    auto methods = cfg.methods.empty() ? std::vector<std::string>{cfg.method} : cfg.methods;
    if (datasets.empty()) {
        throw ConfigError("benchmark needs at least one dataset");
    }
    for (const auto& m : methods) {
        detail::check_method(m);
    }
    std::vector<BenchmarkCell> cells;
    for (const auto& d : datasets) {
        for (auto a : adaptations) {
            for (double f : fractions) {
                for (const auto& m : methods) {
                    for (auto s : cfg.run_seeds()) {
                        BenchmarkCell c;
                        c.dataset = d;
                        c.adaptation = a;
                        c.anchor_fraction = f;
                        c.method = m;
                        c.seed = s;
                        cells.push_back(c);
                    }
                }
            }
        }
    }
    return cells;
}

inline void run_cell(const RunConfig& cfg, BenchmarkCell& cell) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
        const PreparedPair p = prepare_pair(cfg, cell.dataset, cell.adaptation, cell.anchor_fraction, cell.seed);
        if (!p.pair.x.labels || !p.pair.y.labels) {
            throw std::runtime_error("benchmark datasets need labels");
        }
        cell.dim = cfg.dim.value_or(default_dim(p.pair));
        const AlignmentResult r = run_method(cell.method, p.pair, cfg.methods_cfg, cell.dim, cell.seed);
        const MetricsReport rep = evaluate(r.coords(), r.n_x, p.truth, *p.pair.x.labels, *p.pair.y.labels, cfg.ce_k);
        cell.foscttm = rep.foscttm;
        cell.ce = rep.ce_accuracy;
        cell.combined = rep.combined;
        cell.ok = true;
    } catch (const std::exception& e) {
        cell.ok = false;
        cell.error = e.what();
    }
    cell.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// Runs every cell on `jobs` worker threads; the cell order of the output is fixed.
inline void run_cells(const RunConfig& cfg, std::vector<BenchmarkCell>& cells, int jobs,
                      const std::function<void(const BenchmarkCell&)>& on_done = {}) {
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    auto worker = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
            run_cell(cfg, cells[i]);
            if (on_done) {
                std::lock_guard<std::mutex> lock(mu);
                on_done(cells[i]);
            }
        }
    };
    const int n = std::max(1, std::min<int>(jobs, static_cast<int>(cells.size())));
    std::vector<std::thread> pool;
    for (int t = 1; t < n; ++t) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& t : pool) {
        t.join();
    }
}

struct SummaryRow {
    std::string dataset;
    std::string adaptation;
    double anchor_fraction = 0;
    std::string method;
    int n_ok = 0;
    int n_failed = 0;
    double foscttm = 0;
    double ce = 0;
    double combined = 0;
    double seconds = 0;
};

/// Means over seeds per (dataset, adaptation, fraction, method), in first-seen order.
inline std::vector<SummaryRow> summarize(const std::vector<BenchmarkCell>& cells) {
    std::vector<SummaryRow> rows;
    std::map<std::tuple<std::string, std::string, double, std::string>, std::size_t> index;
    for (const auto& c : cells) {
        auto key = std::make_tuple(fs::path(c.dataset).stem().string(), to_string(c.adaptation), c.anchor_fraction, c.method);
        auto [it, fresh] = index.try_emplace(key, rows.size());
        if (fresh) {
            rows.push_back({std::get<0>(key), std::get<1>(key), c.anchor_fraction, c.method});
        }
        auto& r = rows[it->second];
        if (!c.ok) {
            ++r.n_failed;
            continue;
        }
        ++r.n_ok;
        r.foscttm += c.foscttm;
        r.ce += c.ce;
        r.combined += c.combined;
        r.seconds += c.seconds;
    }
    for (auto& r : rows) {
        if (r.n_ok > 0) {
            r.foscttm /= r.n_ok;
            r.ce /= r.n_ok;
            r.combined /= r.n_ok;
            r.seconds /= r.n_ok;
        }
    }
    return rows;
}

inline std::string csv_field(const std::string& s) {
    std::string clean = s;
    std::replace(clean.begin(), clean.end(), '\n', ' ');
    if (clean.find_first_of(",\"") == std::string::npos) {
        return clean;
    }
    std::string q = "\"";
    for (char ch : clean) {
        q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    }
    return q + "\"";
}

inline void write_benchmark_csv(const std::string& path, const std::vector<BenchmarkCell>& cells) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
    out << "dataset,adaptation,anchor_fraction,method,seed,status,dim,foscttm,ce_accuracy,combined,seconds,error\n";
    for (const auto& c : cells) {
        out << csv_field(fs::path(c.dataset).stem().string()) << ',' << to_string(c.adaptation) << ',' << detail::format_double(c.anchor_fraction)
            << ',' << c.method << ',' << c.seed << ',' << (c.ok ? "ok" : "error") << ',' << c.dim << ',';
        if (c.ok) {
            out << detail::format_double(c.foscttm) << ',' << detail::format_double(c.ce) << ',' << detail::format_double(c.combined);
        } else {
            out << ",,";
        }
        out << ',' << std::fixed << std::setprecision(3) << c.seconds << std::defaultfloat << ',' << csv_field(c.error) << '\n';
    }
}

inline void write_summary_csv(const std::string& path, const std::vector<SummaryRow>& rows) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
    out << "dataset,adaptation,anchor_fraction,method,n_ok,n_failed,foscttm_mean,ce_accuracy_mean,combined_mean,seconds_mean\n";
    for (const auto& r : rows) {
        out << csv_field(r.dataset) << ',' << r.adaptation << ',' << detail::format_double(r.anchor_fraction) << ',' << r.method << ','
            << r.n_ok << ',' << r.n_failed << ',' << detail::format_double(r.foscttm) << ',' << detail::format_double(r.ce) << ','
            << detail::format_double(r.combined) << ',' << std::fixed << std::setprecision(3) << r.seconds << std::defaultfloat << '\n';
    }
}

/// `benchmark` verb: writes benchmark.csv and benchmark_summary.csv into `cfg.out`.
inline std::vector<BenchmarkCell> run_benchmark(const RunConfig& cfg, const std::function<void(const BenchmarkCell&)>& on_done = {}) {
    auto cells = benchmark_cells(cfg);
    run_cells(cfg, cells, cfg.jobs, on_done);
    fs::create_directories(cfg.out);
    write_benchmark_csv((fs::path(cfg.out) / "benchmark.csv").string(), cells);
    write_summary_csv((fs::path(cfg.out) / "benchmark_summary.csv").string(), summarize(cells));
    return cells;
}

struct TransferOutcome {
    std::vector<int> predicted;
    std::optional<double> accuracy;
    AlignmentResult result;
    PreparedPair prepared;
};

/// Prepared pair for the sparse-label recipe: top features of a row subset vs the rest.
inline PreparedPair transfer_pair(const RunConfig& cfg, std::uint64_t seed) {
    if (cfg.explicit_inputs()) {
        return prepare_pair(cfg, "", cfg.adaptation, cfg.anchor_fraction, seed);
    }
    const DataMatrix data = load_dataset(cfg.dataset, cfg.label_column, true);
    std::vector<Eigen::Index> ranked;
    if (!cfg.importance_file.empty()) {
        RandomSource unused(seed);
        ranked = rank_features(importance_oracle(cfg)(data, unused));
    } else {
        RandomSource rng = RandomSource(seed).fork(3);
        ranked = rank_features(knn_permutation_importance(data, rng));
    }
    PreparedPair p;
    p.pair = label_transfer_pair(data, ranked, static_cast<std::size_t>(cfg.n_top), cfg.row_fraction, RandomSource(seed).fork(2));
    p.name = fs::path(cfg.dataset).stem().string();
    return p;
}

inline TransferOutcome transfer_once(const RunConfig& cfg, std::uint64_t seed) {
    TransferOutcome t;
    t.prepared = transfer_pair(cfg, seed);
    const auto& pair = t.prepared.pair;
    if (!pair.x.labels) {
        throw std::runtime_error("transfer needs labels in domain x");
    }
    const int dim = cfg.dim.value_or(cfg.explicit_inputs() ? default_dim(pair) : 4);
    t.result = run_method(cfg.method, pair, cfg.methods_cfg, dim, seed);
    t.predicted = transfer_labels(t.result, *pair.x.labels, cfg.ce_k);
    if (pair.y.labels) {
        t.accuracy = accuracy(t.predicted, *pair.y.labels);
    }
    return t;
}

/// `transfer` verb: predictions.csv and accuracy.json per seed.
inline json run_transfer(const RunConfig& cfg) {
    detail::check_method(cfg.method);
    if (!cfg.explicit_inputs() && cfg.dataset.empty()) {
        throw ConfigError("missing dataset");
    }
    const auto seeds = cfg.run_seeds();
    json summary = json::array();
    for (auto s : seeds) {
        const TransferOutcome t = transfer_once(cfg, s);
        const std::string dir = seeds.size() == 1 ? cfg.out : (fs::path(cfg.out) / ("seed_" + std::to_string(s))).string();
        fs::create_directories(dir);
        std::ofstream out(fs::path(dir) / "predictions.csv");
        if (!out) {
            throw std::runtime_error("cannot write predictions in " + dir);
        }
        const auto& names = t.prepared.pair.x.label_names;
        out << "id,predicted" << (t.prepared.pair.y.labels ? ",truth" : "") << '\n';
        for (std::size_t i = 0; i < t.predicted.size(); ++i) {
            out << i << ',' << csv_field(names.at(static_cast<std::size_t>(t.predicted[i])));
            if (t.prepared.pair.y.labels) {
                out << ',' << csv_field(t.prepared.pair.y.label_names.at(static_cast<std::size_t>((*t.prepared.pair.y.labels)[i])));
            }
            out << '\n';
        }
        json acc;
        acc["method"] = t.result.method;
        acc["dataset"] = t.prepared.name;
        acc["seed"] = s;
        acc["n_x"] = t.result.n_x;
        acc["n_y"] = t.result.n_y;
        acc["dim"] = t.result.coords().cols();
        acc["k"] = cfg.ce_k;
        acc["accuracy"] = t.accuracy ? json(*t.accuracy) : json(nullptr);
        write_json((fs::path(dir) / "accuracy.json").string(), acc);
        summary.push_back(acc);
    }
    return summary;
}

/// `importance` verb: feature names, most important first.
inline std::vector<std::string> run_importance(const RunConfig& cfg) {
    const DataMatrix data = load_dataset(cfg.dataset, cfg.label_column, true);
    RandomSource rng = RandomSource(cfg.seed).fork(3);
    std::vector<std::string> names;
    for (auto idx : rank_features(knn_permutation_importance(data, rng))) {
        names.push_back(data.feature_names[static_cast<std::size_t>(idx)]);
    }
    fs::create_directories(cfg.out);
    write_ranking_file(names, (fs::path(cfg.out) / "ranking.txt").string());
    return names;
}

inline json error_json(const std::string& type, const std::string& message) {
    return {{"status", "error"}, {"error", {{"type", type}, {"message", message}}}};
}

} // namespace mashspud::tools

#endif
