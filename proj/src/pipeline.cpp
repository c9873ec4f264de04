#include "vsense/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <iostream>
#include <sstream>

#include "vsense/io_util.hpp"

namespace vsense {

namespace {

double now_seconds() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

void log(const RunConfig& cfg, const std::string& msg) {
    if (cfg.verbose) std::cerr << "[pipeline] " << msg << "\n";
}

}  // namespace

std::string config_echo(const RunConfig& cfg, const std::string& section) {
    std::ostringstream out;
    out << '[' << section << "]\n";
    out << "seed=" << cfg.seed << '\n';
    out << "k=" << cfg.k << '\n';
    out << "n-train=" << cfg.n_train << '\n';
    out << "n-test=" << cfg.n_test << '\n';
    out << "y-min=" << fmt17(cfg.y_min) << '\n';
    out << "eps-series=" << fmt17(cfg.spec.eps_series) << '\n';
    out << "eps-scalar=" << fmt17(cfg.spec.eps_scalar) << '\n';
    out << "epochs=" << cfg.train_cfg.epochs << '\n';
    out << "batch-size=" << cfg.train_cfg.batch_size << '\n';
    out << "momentum=" << fmt17(cfg.train_cfg.momentum) << '\n';
    out << "lr-peak=" << fmt17(cfg.train_cfg.lr_peak) << '\n';
    out << "lr-peak-epoch=" << cfg.train_cfg.lr_peak_epoch << '\n';
    out << "lambda=" << fmt17(cfg.train_cfg.lambda) << '\n';
    out << "target-lo=" << fmt17(cfg.train_cfg.target_lo) << '\n';
    out << "target-hi=" << fmt17(cfg.train_cfg.target_hi) << '\n';
    out << "eps-ramp-epochs=" << cfg.train_cfg.eps_ramp_epochs << '\n';
    out << "hidden-dim=" << cfg.train_cfg.hidden_dim << '\n';
    out << "pgd-steps=" << cfg.attack.steps << '\n';
    out << "pgd-step-series=" << fmt17(cfg.attack.step_series) << '\n';
    out << "pgd-step-scalar=" << fmt17(cfg.attack.step_scalar) << '\n';
    out << "restarts=" << cfg.attack.restarts << '\n';
    out << "random-start=" << (cfg.attack.random_start ? "true" : "false") << '\n';
    out << "noise-draws=" << cfg.noise_draws << '\n';
    out << "tol=" << fmt17(cfg.verify_tol) << '\n';
    out << "node-limit=" << cfg.node_limit << '\n';
    out << "jobs=" << cfg.jobs << '\n';
    return out.str();
}

void write_config_echo(const RunConfig& cfg, const std::string& section,
                       const std::filesystem::path& out_dir) {
    write_file_atomic(out_dir / "config.toml", config_echo(cfg, section));
}

PipelineResult run_pipeline(const RunConfig& cfg, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    write_config_echo(cfg, "pipeline", out_dir);

    PipelineResult result;
    result.out_dir = out_dir;

    log(cfg, "generating data");
    const Dataset train_set =
        generate(cfg.n_train, cfg.k, mix_seed(cfg.seed, seed_stream::kTrainData), cfg.y_min);
    const Dataset test_set =
        generate(cfg.n_test, cfg.k, mix_seed(cfg.seed, seed_stream::kTestData), cfg.y_min);
    save_csv(train_set, out_dir / "train.csv");
    save_csv(test_set, out_dir / "test.csv");

    std::vector<DenseNet> nets;
    for (TrainMode mode : kPipelineModes) {
        TrainConfig tc = cfg.train_cfg;
        tc.mode = mode;
        tc.seed = cfg.seed;
        const double t0 = now_seconds();
        TrainResult tr = train(train_set, tc, cfg.spec);
        log(cfg, "trained " + to_string(mode) + " in " +
                     std::to_string(now_seconds() - t0) + "s, final loss " +
                     std::to_string(tr.epoch_loss.back()));
        const auto model_path = out_dir / ("model_" + to_string(mode) + ".json");
        save_model(tr.net, model_path);
        result.model_paths.push_back(model_path);
        nets.push_back(std::move(tr.net));
    }

    // Per-model attack summaries, certificates, and table rows.
    for (std::size_t mi = 0; mi < nets.size(); ++mi) {
        const std::string name = to_string(kPipelineModes[mi]);
        const DenseNet& net = nets[mi];

        std::ostringstream pgd_csv;
        pgd_csv << "example_id,y,clean_rel_err,adv_rel_err\n";
        for (int i = 0; i < test_set.n; ++i) {
            const auto x = test_set.row(i);
            const double y = test_set.Y[i];
            const Box box = box_of(cfg.spec, x);
            Rng rng(mix_seed(cfg.seed, seed_stream::kPgd, i));
            const AttackResult res = pgd_attack(net, x, y, box, cfg.attack, rng);
            const double clean = std::abs(forward(net, x) - y) / std::abs(y);
            pgd_csv << i << ',' << fmt17(y) << ',' << fmt17(clean) << ',' << fmt17(res.adv_err)
                    << '\n';
        }
        write_file_atomic(out_dir / ("pgd_" + name + ".csv"), pgd_csv.str());

        const double t0 = now_seconds();
        const auto certs_dual = verify_dataset(net, test_set, cfg.spec, CertMethod::Dual,
                                               cfg.verify_tol, cfg.node_limit, cfg.jobs);
        const auto certs_milp = verify_dataset(net, test_set, cfg.spec, CertMethod::Milp,
                                               cfg.verify_tol, cfg.node_limit, cfg.jobs);
        log(cfg, "verified " + name + " in " + std::to_string(now_seconds() - t0) + "s");
        save_certificates_jsonl(certs_dual, out_dir / ("certs_" + name + "_dual.jsonl"));
        save_certificates_jsonl(certs_milp, out_dir / ("certs_" + name + "_milp.jsonl"));

        result.tables.push_back(build_table(net, test_set, cfg.spec, certs_dual, certs_milp,
                                            cfg.attack, cfg.noise_draws, cfg.seed, name));
    }

    result.report_md = out_dir / "report.md";
    result.report_csv = out_dir / "report.csv";
    emit_report_md(result.tables, result.report_md);
    emit_report_csv(result.tables, result.report_csv);

    emit_scatter(nets[0], test_set, out_dir / "scatter_standard.csv");
    emit_scatter(nets[3], test_set, out_dir / "scatter_targeted.csv");

    // Series plot data for the standard model's most degraded example.
    int worst = 0;
    double worst_gap = -1.0;
    Vector worst_adv;
    for (int i = 0; i < test_set.n; ++i) {
        const auto x = test_set.row(i);
        const double y = test_set.Y[i];
        const Box box = box_of(cfg.spec, x);
        Rng rng(mix_seed(cfg.seed, seed_stream::kPgd, i));
        const AttackResult res = pgd_attack(nets[0], x, y, box, cfg.attack, rng);
        const double clean = std::abs(forward(nets[0], x) - y) / std::abs(y);
        if (res.adv_err - clean > worst_gap) {
            worst_gap = res.adv_err - clean;
            worst = i;
            worst_adv = res.z;
        }
    }
    emit_series(test_set.row(worst), worst_adv, box_of(cfg.spec, test_set.row(worst)),
                out_dir / ("series_" + std::to_string(worst) + ".csv"));

    log(cfg, "report written to " + result.report_csv.string());
    return result;
}

}  // namespace vsense
