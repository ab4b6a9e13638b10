// memmap: train / predict / verify for Student-t membership-mapping
// regression models.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "memmap/csv.hpp"
#include "memmap/learner.hpp"
#include "memmap/model_store.hpp"
#include "memmap/oracle.hpp"
#include "memmap/predictor.hpp"

namespace {

enum class LogLevel { error = 0, info = 1, debug = 2 };

LogLevel log_level() {
    const char* env = std::getenv("MEMMAP_LOG");
    if (env == nullptr) return LogLevel::error;
    const std::string v(env);
    if (v == "debug") return LogLevel::debug;
    if (v == "info") return LogLevel::info;
    return LogLevel::error;
}

void log_info(const std::string& msg) {
    if (log_level() >= LogLevel::info) std::cerr << "[info] " << msg << "\n";
}

void log_debug(const std::string& msg) {
    if (log_level() >= LogLevel::debug) std::cerr << "[debug] " << msg << "\n";
}

struct TrainOptions {
    std::string data;
    std::string out;
    std::string aux;
    int n_features = 0;
    Eigen::Index m = 0;
    double nu = 5.0;
    std::uint64_t seed = 0;
    double beta_tol = 1e-6;
    int max_iters = 1000;
    bool store_b = false;
    bool header = false;
};

int run_train(const TrainOptions& opt) {
    if (!(opt.nu > 2.0)) {
        std::cerr << "error: nu must exceed 2\n";
        return 2;
    }
    const memmap::Matrix table = memmap::read_csv(opt.data, opt.header);
    if (opt.n_features < 1 || opt.n_features >= table.cols()) {
        std::cerr << "error: --n-features must be in [1, " << table.cols() - 1
                  << "] for " << table.cols() << "-column data\n";
        return 2;
    }
    const auto n = static_cast<Eigen::Index>(opt.n_features);
    const memmap::Matrix X = table.leftCols(n);
    const memmap::Matrix Y = table.rightCols(table.cols() - n);

    memmap::HyperParams hp;
    hp.M = opt.m;
    hp.nu = opt.nu;
    hp.seed = opt.seed;
    hp.beta_rel_tol = opt.beta_tol;
    hp.max_outer_iters = opt.max_iters;

    std::optional<memmap::Matrix> aux;
    if (!opt.aux.empty()) {
        aux = memmap::read_csv(opt.aux, false);
    }

    log_info("training on " + std::to_string(X.rows()) + " rows, " +
             std::to_string(X.cols()) + " features, " +
             std::to_string(Y.cols()) + " targets");
    const auto [model, report] = memmap::fit(X, Y, hp, aux);
    log_debug("beta converged to " +
              std::to_string(report.beta_trace.empty()
                                 ? 0.0
                                 : report.beta_trace.back()) +
              " after " + std::to_string(report.iterations) + " iterations");

    memmap::save_model(model, opt.out, opt.store_b);
    memmap::save_report(report, opt.out + ".report.json");
    if (!report.converged) {
        std::cerr << "warning: beta did not converge within "
                  << opt.max_iters << " iterations\n";
    }
    log_info("model written to " + opt.out);
    return 0;
}

struct PredictOptions {
    std::string model;
    std::string data;
    std::string out;
    bool header = false;
};

int run_predict(const PredictOptions& opt) {
    const memmap::ModelParams model = memmap::load_model(opt.model);
    const memmap::Matrix X = memmap::read_csv(opt.data, opt.header);
    if (X.rows() > 0 && X.cols() != model.n) {
        std::cerr << "error: input has " << X.cols()
                  << " features but the model expects " << model.n << "\n";
        return 2;
    }
    memmap::Matrix Yhat(X.rows(), model.p);
    if (X.rows() > 0) Yhat = memmap::predict_batch(X, model);
    std::vector<std::string> header;
    for (Eigen::Index j = 1; j <= model.p; ++j) {
        header.push_back("y_hat_" + std::to_string(j));
    }
    memmap::write_csv(Yhat, opt.out, header);
    log_info("wrote " + std::to_string(Yhat.rows()) + " predictions to " +
             opt.out);
    return 0;
}

struct VerifyOptions {
    std::string suite = "all";
    std::uint64_t seed = 0;
    int trials = 0;
    std::string json_out;
};

void print_report(const memmap::oracle::Report& r) {
    std::cout << (r.pass ? "PASS" : "FAIL") << "  " << r.check
              << "  max_rel_err=" << r.max_rel_err
              << "  tolerance=" << r.tolerance << "  trials=" << r.trials;
    if (r.skipped > 0) std::cout << "  skipped=" << r.skipped;
    std::cout << "\n";
}

int run_verify(const VerifyOptions& opt) {
    std::vector<memmap::oracle::Report> reports;
    if (opt.suite == "consistency" || opt.suite == "all") {
        const int seeds = opt.trials > 0 ? opt.trials : 10;
        reports.push_back(memmap::oracle::check_consistency_suite(seeds, opt.seed));
    }
    if (opt.suite == "interpolation" || opt.suite == "all") {
        const int trials = opt.trials > 0 ? opt.trials : 100;
        reports.push_back(
            memmap::oracle::check_interpolation_identity(4, 4, trials, opt.seed));
    }
    if (opt.suite == "phi-limit" || opt.suite == "all") {
        reports.push_back(memmap::oracle::check_phi_limit(20, 5, opt.seed));
    }
    if (reports.empty()) {
        std::cerr << "error: unknown suite \"" << opt.suite
                  << "\" (expected consistency|interpolation|phi-limit|all)\n";
        return 2;
    }
    bool all_pass = true;
    for (const auto& r : reports) {
        print_report(r);
        if (!r.pass) {
            std::cerr << "verification failure: " << r.check << " max_rel_err "
                      << r.max_rel_err << " exceeds " << r.tolerance << "\n";
            all_pass = false;
        }
    }
    if (!opt.json_out.empty()) {
        std::ostringstream os;
        os << "{\"checks\": [";
        for (std::size_t i = 0; i < reports.size(); ++i) {
            const auto& r = reports[i];
            if (i != 0) os << ',';
            os << "{\"check\": \"" << r.check << "\", \"pass\": "
               << (r.pass ? "true" : "false")
               << ", \"max_rel_err\": " << r.max_rel_err
               << ", \"tolerance\": " << r.tolerance
               << ", \"trials\": " << r.trials
               << ", \"skipped\": " << r.skipped << "}";
        }
        os << "]}\n";
        std::ofstream out(opt.json_out, std::ios::binary);
        if (!out) throw memmap::IoError("cannot open for writing: " + opt.json_out);
        out << os.str();
    }
    return all_pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Student-t membership-mapping regression"};
    app.require_subcommand(1);

    TrainOptions train;
    auto* cmd_train = app.add_subcommand("train", "Fit a model from CSV data");
    cmd_train->add_option("--data", train.data, "training CSV")->required();
    cmd_train->add_option("--n-features", train.n_features,
                          "number of leading feature columns")->required();
    cmd_train->add_option("--out", train.out, "output model path (.mmj)")
        ->required();
    cmd_train->add_option("--m", train.m, "number of inducing points");
    cmd_train->add_option("--nu", train.nu, "degrees of freedom (> 2)");
    cmd_train->add_option("--seed", train.seed, "RNG seed");
    cmd_train->add_option("--aux", train.aux, "CSV of inducing points");
    cmd_train->add_option("--beta-tol", train.beta_tol,
                          "relative beta convergence tolerance");
    cmd_train->add_option("--max-iters", train.max_iters,
                          "maximum outer iterations");
    cmd_train->add_flag("--store-b", train.store_b, "persist the B matrix");
    cmd_train->add_flag("--header", train.header, "skip the first CSV row");

    PredictOptions predict;
    auto* cmd_predict = app.add_subcommand("predict", "Evaluate a saved model");
    cmd_predict->add_option("--model", predict.model, "model file")->required();
    cmd_predict->add_option("--data", predict.data, "input CSV")->required();
    cmd_predict->add_option("--out", predict.out, "output CSV")->required();
    cmd_predict->add_flag("--header", predict.header, "skip the first CSV row");

    VerifyOptions verify;
    auto* cmd_verify = app.add_subcommand("verify", "Run the numerical oracles");
    cmd_verify->add_option("--suite", verify.suite,
                           "consistency|interpolation|phi-limit|all");
    cmd_verify->add_option("--seed", verify.seed, "RNG seed");
    cmd_verify->add_option("--trials", verify.trials, "trial count override");
    cmd_verify->add_option("--json-out", verify.json_out,
                           "write a JSON report to this path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (cmd_train->parsed()) return run_train(train);
        if (cmd_predict->parsed()) return run_predict(predict);
        if (cmd_verify->parsed()) return run_verify(verify);
    } catch (const memmap::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const memmap::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const memmap::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
