#include "harness.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace mashspud;
using namespace mashspud::tools;

namespace {

struct Overrides {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::string method;
    std::string anchors;
    std::optional<int> dim;
    std::optional<int> jobs;
    std::string dataset;
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config, "JSON run configuration");
    cmd->add_option("--out", o.out, "Output directory");
    cmd->add_option("--seed", o.seed, "Base seed");
    cmd->add_option("--method", o.method, "spud, mash, mash_minus, nama, jlma or mapa");
    cmd->add_option("--anchors", o.anchors, "Anchor fraction in (0, 1] or a CSV of index pairs");
    cmd->add_option("--dim", o.dim, "Embedding dimension");
    cmd->add_option("--jobs", o.jobs, "Worker threads for benchmark cells");
    cmd->add_option("--dataset", o.dataset, "Input CSV");
}

RunConfig resolve(const Overrides& o) {
    RunConfig cfg = o.config.empty() ? RunConfig{} : load_config(o.config);
    if (!o.out.empty()) {
        cfg.out = o.out;
    }
    if (o.seed) {
        cfg.seed = *o.seed;
        cfg.seeds.clear();
    }
    if (!o.method.empty()) {
        cfg.method = o.method;
        cfg.methods.clear();
    }
    if (!o.anchors.empty()) {
        std::size_t used = 0;
        double f = 0;
        try {
            f = std::stod(o.anchors, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == o.anchors.size()) {
            if (!(f > 0 && f <= 1)) {
                throw ConfigError("--anchors fraction must be in (0, 1]");
            }
            cfg.anchor_fraction = f;
            cfg.anchor_fractions.clear();
        } else {
            cfg.anchors_file = o.anchors;
        }
    }
    if (o.dim) {
        cfg.dim = *o.dim;
    }
    if (o.jobs) {
        cfg.jobs = *o.jobs;
    }
    if (!o.dataset.empty()) {
        cfg.dataset = o.dataset;
        cfg.datasets.clear();
    }
    return cfg;
}

int fail(const std::string& type, const std::string& message, const std::string& out_dir) {
    const auto j = error_json(type, message);
    std::cerr << j.dump() << '\n';
    if (!out_dir.empty()) {
        std::error_code ec;
        fs::create_directories(out_dir, ec);
        if (!ec) {
            std::ofstream(fs::path(out_dir) / "error.json") << j.dump(2) << '\n';
        }
    }
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Semi-supervised manifold alignment with shortest paths (SPUD) and diffusion (MASH)"};
    app.require_subcommand(1);
    Overrides o;
    auto* align = app.add_subcommand("align", "Align one dataset pair and write embedding, metrics, diagnostics and a plot");
    auto* bench = app.add_subcommand("benchmark", "Run a grid of datasets x adaptations x fractions x methods x seeds");
    auto* transfer = app.add_subcommand("transfer", "Transfer labels from a sparsely sampled domain to the other");
    auto* importance = app.add_subcommand("importance", "Write a feature importance ranking");
    for (auto* cmd : {align, bench, transfer, importance}) {
        add_common(cmd, o);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("usage_error", e.what(), "");
    }

    RunConfig cfg;
    try {
        cfg = resolve(o);
        if (align->parsed()) {
            const json summary = run_align(cfg);
            std::cout << json{{"status", "ok"}, {"runs", summary.size()}, {"out", cfg.out}}.dump() << '\n';
        } else if (bench->parsed()) {
            std::size_t done = 0;
            const auto cells = run_benchmark(cfg, [&](const BenchmarkCell& c) {
                ++done;
                std::cerr << '[' << done << "] " << fs::path(c.dataset).stem().string() << ' ' << to_string(c.adaptation) << ' '
                          << c.anchor_fraction << ' ' << c.method << " seed " << c.seed << ": "
                          << (c.ok ? "combined " + tools::detail::format_double(c.combined) : "error " + c.error) << '\n';
            });
            const auto failed = std::count_if(cells.begin(), cells.end(), [](const BenchmarkCell& c) { return !c.ok; });
            std::cout << json{{"status", "ok"}, {"cells", cells.size()}, {"failed", failed}, {"out", cfg.out}}.dump() << '\n';
        } else if (transfer->parsed()) {
            const json summary = run_transfer(cfg);
            std::cout << json{{"status", "ok"}, {"runs", summary}}.dump() << '\n';
        } else {
            const auto names = run_importance(cfg);
            std::cout << json{{"status", "ok"}, {"ranking", names}}.dump() << '\n';
        }
    } catch (const ConfigError& e) {
        return fail("config_error", e.what(), o.out);
    } catch (const std::exception& e) {
        return fail("runtime_error", e.what(), o.out);
    }
    return 0;
}
