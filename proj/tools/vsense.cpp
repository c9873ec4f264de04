// Command-line front end for the robust virtual-sensor toolkit: synthetic
// data generation, the four training modes, PGD attacks, dual/MILP
// verification, and report assembly.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "vsense/io_util.hpp"
#include "vsense/pipeline.hpp"

namespace fs = std::filesystem;
using namespace vsense;

namespace {

struct CliState {
    RunConfig cfg;
    std::string mode = "standard";
    std::string method = "milp";
    std::string data_path, model_path, certs_dual_path, certs_milp_path;
    std::string out_dir;
    int limit = -1;
    int series_id = -1;
};

void add_perturb_flags(CLI::App* cmd, CliState& st) {
    cmd->add_option("--eps-series", st.cfg.spec.eps_series,
                    "noise bound per time-series feature");
    cmd->add_option("--eps-scalar", st.cfg.spec.eps_scalar, "noise bound for the scalar sensor");
}

void add_attack_flags(CLI::App* cmd, CliState& st) {
    cmd->add_option("--pgd-steps", st.cfg.attack.steps, "PGD iteration count");
    cmd->add_option("--pgd-step-series", st.cfg.attack.step_series,
                    "PGD step size for series features");
    cmd->add_option("--pgd-step-scalar", st.cfg.attack.step_scalar,
                    "PGD step size for the scalar feature");
    cmd->add_option("--restarts", st.cfg.attack.restarts, "PGD restarts");
    cmd->add_flag("--random-start", st.cfg.attack.random_start, "start PGD from a random point");
}

void add_train_flags(CLI::App* cmd, CliState& st) {
    cmd->add_option("--mode", st.mode, "standard|noise|robust|targeted");
    cmd->add_option("--epochs", st.cfg.train_cfg.epochs, "training epochs");
    cmd->add_option("--batch-size", st.cfg.train_cfg.batch_size, "minibatch size");
    cmd->add_option("--momentum", st.cfg.train_cfg.momentum, "SGD momentum");
    cmd->add_option("--lr-peak", st.cfg.train_cfg.lr_peak, "cyclic learning-rate peak");
    cmd->add_option("--lr-peak-epoch", st.cfg.train_cfg.lr_peak_epoch,
                    "epoch at which the learning rate peaks");
    cmd->add_option("--lambda", st.cfg.train_cfg.lambda,
                    "targeted mode: weight of the standard loss");
    cmd->add_option("--target-lo", st.cfg.train_cfg.target_lo, "targeted range lower edge");
    cmd->add_option("--target-hi", st.cfg.train_cfg.target_hi, "targeted range upper edge");
    cmd->add_option("--eps-ramp-epochs", st.cfg.train_cfg.eps_ramp_epochs,
                    "epochs over which epsilon ramps to full strength");
    cmd->add_option("--hidden-dim", st.cfg.train_cfg.hidden_dim, "hidden units");
}

void add_verify_flags(CLI::App* cmd, CliState& st) {
    cmd->add_option("--tol", st.cfg.verify_tol, "branch-and-bound gap tolerance");
    cmd->add_option("--node-limit", st.cfg.node_limit, "node budget per direction");
    cmd->add_option("--jobs", st.cfg.jobs, "worker threads (0 = hardware)");
}

fs::path require_out_dir(const CliState& st) {
    fs::path dir(st.out_dir);
    fs::create_directories(dir);
    return dir;
}

int run_gen_data(CliState& st) {
    const fs::path dir = require_out_dir(st);
    write_config_echo(st.cfg, "gen-data", dir);
    const Dataset train_set =
        generate(st.cfg.n_train, st.cfg.k, mix_seed(st.cfg.seed, seed_stream::kTrainData),
                 st.cfg.y_min);
    const Dataset test_set = generate(
        st.cfg.n_test, st.cfg.k, mix_seed(st.cfg.seed, seed_stream::kTestData), st.cfg.y_min);
    save_csv(train_set, dir / "train.csv");
    save_csv(test_set, dir / "test.csv");
    std::cout << "wrote " << (dir / "train.csv").string() << " (" << train_set.n << ") and "
              << (dir / "test.csv").string() << " (" << test_set.n << ")\n";
    return 0;
}

int run_train(CliState& st) {
    const fs::path dir = require_out_dir(st);
    write_config_echo(st.cfg, "train", dir);
    const Dataset data = load_csv(st.data_path);
    TrainConfig tc = st.cfg.train_cfg;
    tc.mode = train_mode_from_string(st.mode);
    tc.seed = st.cfg.seed;
    const TrainResult tr = train(data, tc, st.cfg.spec);
    save_model(tr.net, dir / "model.json");
    std::cout << "wrote " << (dir / "model.json").string() << " (final training loss "
              << tr.epoch_loss.back() << ")\n";
    return 0;
}

int run_attack(CliState& st) {
    const fs::path dir = require_out_dir(st);
    write_config_echo(st.cfg, "attack", dir);
    const DenseNet net = load_model(st.model_path);
    const Dataset data = load_csv(st.data_path);
    const int count = st.limit < 0 ? data.n : std::min(st.limit, data.n);
    std::ostringstream out;
    out << "example_id,y,clean_rel_err,adv_rel_err\n";
    double mean_adv = 0.0;
    for (int i = 0; i < count; ++i) {
        const auto x = data.row(i);
        const double y = data.Y[i];
        const Box box = box_of(st.cfg.spec, x);
        Rng rng(mix_seed(st.cfg.seed, seed_stream::kPgd, i));
        const AttackResult res = pgd_attack(net, x, y, box, st.cfg.attack, rng);
        const double clean = std::abs(forward(net, x) - y) / std::abs(y);
        out << i << ',' << fmt17(y) << ',' << fmt17(clean) << ',' << fmt17(res.adv_err) << '\n';
        mean_adv += res.adv_err;
    }
    write_file_atomic(dir / "pgd.csv", out.str());
    std::cout << "wrote " << (dir / "pgd.csv").string() << "; mean adversarial error "
              << 100.0 * mean_adv / std::max(1, count) << "%\n";
    return 0;
}

int run_verify(CliState& st) {
    const fs::path dir = require_out_dir(st);
    write_config_echo(st.cfg, "verify", dir);
    const DenseNet net = load_model(st.model_path);
    const Dataset data = load_csv(st.data_path);
    const CertMethod method = st.method == "dual" ? CertMethod::Dual : CertMethod::Milp;
    const auto certs = verify_dataset(net, data, st.cfg.spec, method, st.cfg.verify_tol,
                                      st.cfg.node_limit, st.cfg.jobs, st.limit);
    const fs::path out = dir / ("certs_" + st.method + ".jsonl");
    save_certificates_jsonl(certs, out);
    int timeouts = 0;
    for (const auto& c : certs) timeouts += c.status == CertStatus::Timeout;
    std::cout << "wrote " << out.string() << " (" << certs.size() << " certificates, "
              << timeouts << " timeouts)\n";
    return 0;
}

int run_report(CliState& st) {
    const fs::path dir = require_out_dir(st);
    write_config_echo(st.cfg, "report", dir);
    const DenseNet net = load_model(st.model_path);
    const Dataset data = load_csv(st.data_path);
    const auto certs_dual = load_certificates_jsonl(st.certs_dual_path);
    const auto certs_milp = load_certificates_jsonl(st.certs_milp_path);
    const EvalTable table = build_table(net, data, st.cfg.spec, certs_dual, certs_milp,
                                        st.cfg.attack, st.cfg.noise_draws, st.cfg.seed,
                                        net.meta.mode);
    emit_report_md({table}, dir / "report.md");
    emit_report_csv({table}, dir / "report.csv");
    emit_scatter(net, data, dir / "scatter.csv");

    int series = st.series_id;
    if (series < 0) {
        // Default to the example whose PGD degradation is largest.
        double worst_gap = -1.0;
        for (int i = 0; i < data.n; ++i) {
            const auto x = data.row(i);
            const Box box = box_of(st.cfg.spec, x);
            Rng rng(mix_seed(st.cfg.seed, seed_stream::kPgd, i));
            const AttackResult res = pgd_attack(net, x, data.Y[i], box, st.cfg.attack, rng);
            const double clean = std::abs(forward(net, x) - data.Y[i]) / std::abs(data.Y[i]);
            if (res.adv_err - clean > worst_gap) {
                worst_gap = res.adv_err - clean;
                series = i;
            }
        }
    }
    if (series >= data.n) throw std::runtime_error("--series-id outside the dataset");
    {
        const auto x = data.row(series);
        const Box box = box_of(st.cfg.spec, x);
        Rng rng(mix_seed(st.cfg.seed, seed_stream::kPgd, series));
        const AttackResult res = pgd_attack(net, x, data.Y[series], box, st.cfg.attack, rng);
        emit_series(x, res.z, box, dir / ("series_" + std::to_string(series) + ".csv"));
    }
    std::cout << "wrote report.md, report.csv, scatter.csv, series_" << series << ".csv in "
              << dir.string() << "\n";
    return 0;
}

int run_pipeline_cmd(CliState& st) {
    const PipelineResult res = run_pipeline(st.cfg, require_out_dir(st));
    std::cout << "pipeline complete; report at " << res.report_csv.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"robust virtual-sensor training and verification toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "read options from a TOML config file");
    app.fallthrough();

    CliState st;
    app.add_option("--seed", st.cfg.seed, "master seed");

    CLI::App* gen = app.add_subcommand("gen-data", "write synthetic train/test CSVs");
    gen->add_option("--n-train", st.cfg.n_train, "training examples");
    gen->add_option("--n-test", st.cfg.n_test, "test examples");
    gen->add_option("--k", st.cfg.k, "feature dimension (series length + 1)");
    gen->add_option("--y-min", st.cfg.y_min, "smallest target value");
    gen->add_option("--out-dir", st.out_dir, "output directory")->required();

    CLI::App* tr = app.add_subcommand("train", "train one model");
    tr->add_option("--data", st.data_path, "training CSV")->required();
    tr->add_option("--out-dir", st.out_dir, "output directory")->required();
    add_train_flags(tr, st);
    add_perturb_flags(tr, st);

    CLI::App* at = app.add_subcommand("attack", "PGD attack over a dataset");
    at->add_option("--model", st.model_path, "model JSON")->required();
    at->add_option("--data", st.data_path, "dataset CSV")->required();
    at->add_option("--out-dir", st.out_dir, "output directory")->required();
    at->add_option("--limit", st.limit, "attack only the first N examples");
    add_attack_flags(at, st);
    add_perturb_flags(at, st);

    CLI::App* ve = app.add_subcommand("verify", "certify worst-case bounds per example");
    ve->add_option("--model", st.model_path, "model JSON")->required();
    ve->add_option("--data", st.data_path, "dataset CSV")->required();
    ve->add_option("--method", st.method, "dual|milp")
        ->check(CLI::IsMember({"dual", "milp"}));
    ve->add_option("--limit", st.limit, "verify only the first N examples");
    ve->add_option("--out-dir", st.out_dir, "output directory")->required();
    add_verify_flags(ve, st);
    add_perturb_flags(ve, st);

    CLI::App* re = app.add_subcommand("report", "assemble the evaluation table for one model");
    re->add_option("--model", st.model_path, "model JSON")->required();
    re->add_option("--data", st.data_path, "test CSV")->required();
    re->add_option("--certs-dual", st.certs_dual_path, "dual certificates JSONL")->required();
    re->add_option("--certs-milp", st.certs_milp_path, "MILP certificates JSONL")->required();
    re->add_option("--out-dir", st.out_dir, "output directory")->required();
    re->add_option("--series-id", st.series_id, "example for the series plot data");
    re->add_option("--noise-draws", st.cfg.noise_draws, "draws for the noise-error row");
    add_attack_flags(re, st);
    add_perturb_flags(re, st);

    CLI::App* pi = app.add_subcommand("pipeline", "full end-to-end run, all four modes");
    pi->add_option("--out-dir", st.out_dir, "output directory")->required();
    pi->add_option("--n-train", st.cfg.n_train, "training examples");
    pi->add_option("--n-test", st.cfg.n_test, "test examples");
    pi->add_option("--k", st.cfg.k, "feature dimension");
    pi->add_option("--y-min", st.cfg.y_min, "smallest target value");
    pi->add_option("--noise-draws", st.cfg.noise_draws, "draws for the noise-error row");
    pi->add_flag("--quiet", [&st](std::int64_t) { st.cfg.verbose = false; },
                 "suppress progress output");
    add_train_flags(pi, st);
    add_attack_flags(pi, st);
    add_perturb_flags(pi, st);
    add_verify_flags(pi, st);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        if (gen->parsed()) return run_gen_data(st);
        if (tr->parsed()) return run_train(st);
        if (at->parsed()) return run_attack(st);
        if (ve->parsed()) return run_verify(st);
        if (re->parsed()) return run_report(st);
        if (pi->parsed()) return run_pipeline_cmd(st);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
