// moddev: desk-scale experiments with moderate-deviation probabilities of
// i.i.d. sums over open convex sets. Subcommands cover dominating points,
// naive/tilted estimation, the representation-formula check, the closed-form
// asymptotics, Gaussian-ratio experiments, and slice-domination probes.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>

#include "moddev/asymptotics.hpp"
#include "moddev/convex.hpp"
#include "moddev/dominating.hpp"
#include "moddev/errors.hpp"
#include "moddev/io_json.hpp"
#include "moddev/montecarlo.hpp"
#include "moddev/parallel.hpp"
#include "moddev/representation.hpp"
#include "moddev/tilting.hpp"

namespace {

using moddev::Errc;
using moddev::fail;
using nlohmann::json;

struct CliArgs {
    std::string config_path;
    std::string model_json, dist_json, body_json, slice_json;
    std::vector<double> grid;
    double alpha = -1.0, c = -1.0, b_n = -1.0, rho = -1.0;
    long n = -1, samples = -1;
    std::vector<long> n_list;
    long long seed = -1;
    int threads = -1;
    std::string format, output, method, which;
};

json load_config(const CliArgs& args) {
    json cfg = json::object();
    if (!args.config_path.empty()) {
        std::ifstream in(args.config_path);
        if (!in) fail(Errc::InvalidConfig, "cannot open config file " + args.config_path);
        try {
            in >> cfg;
        } catch (const json::exception& e) {
            fail(Errc::InvalidConfig, std::string("config parse error: ") + e.what());
        }
        if (!cfg.is_object()) fail(Errc::InvalidConfig, "config root must be an object");
    }
    auto inline_json = [](const std::string& text, const char* what) {
        try {
            return json::parse(text);
        } catch (const json::exception& e) {
            fail(Errc::InvalidConfig,
                 std::string(what) + " is not valid JSON: " + e.what());
        }
    };
    if (!args.model_json.empty()) cfg["model"] = inline_json(args.model_json, "--model");
    if (!args.dist_json.empty())
        cfg["distribution"] = inline_json(args.dist_json, "--distribution");
    if (!args.body_json.empty()) cfg["body"] = inline_json(args.body_json, "--body");
    if (!args.slice_json.empty()) cfg["slice"] = inline_json(args.slice_json, "--slice");
    if (!args.grid.empty()) cfg["grid"] = args.grid;
    if (args.alpha >= 0.0) cfg["schedule"]["alpha"] = args.alpha;
    if (args.c >= 0.0) cfg["schedule"]["c"] = args.c;
    if (args.b_n >= 0.0) cfg["b_n"] = args.b_n;
    if (args.rho >= 0.0) cfg["rho"] = args.rho;
    if (args.n >= 0) cfg["n"] = args.n;
    if (!args.n_list.empty()) cfg["n_list"] = args.n_list;
    if (args.samples >= 0) cfg["samples"] = args.samples;
    if (args.seed >= 0) cfg["seed"] = args.seed;
    if (args.threads >= 0) cfg["threads"] = args.threads;
    if (!args.format.empty()) cfg["format"] = args.format;
    if (!args.output.empty()) cfg["output"] = args.output;
    if (!args.method.empty()) cfg["method"] = args.method;
    if (!args.which.empty()) cfg["which"] = args.which;
    return cfg;
}

// --- config accessors -------------------------------------------------------

long require_long(const json& cfg, const char* key) {
    if (!cfg.contains(key) || !cfg[key].is_number())
        fail(Errc::InvalidConfig, std::string("missing required option '") + key + "'");
    return cfg[key].get<long>();
}

std::uint64_t require_seed(const json& cfg) {
    if (!cfg.contains("seed") || !cfg["seed"].is_number())
        fail(Errc::InvalidConfig,
             "stochastic commands require an explicit seed (no wall-clock default)");
    return cfg["seed"].get<std::uint64_t>();
}

long samples_or(const json& cfg, long fallback) {
    const long s = cfg.contains("samples") ? cfg["samples"].get<long>() : fallback;
    if (s < 1) fail(Errc::InvalidConfig, "samples must be >= 1");
    return s;
}

int threads_of(const json& cfg) {
    if (cfg.contains("threads")) {
        const int t = cfg["threads"].get<int>();
        if (t < 1) fail(Errc::InvalidConfig, "threads must be >= 1");
        return t;
    }
    return moddev::default_thread_count();
}

std::string format_of(const json& cfg, const std::string& fallback) {
    const std::string f = cfg.value("format", fallback);
    if (f != "json" && f != "csv")
        fail(Errc::InvalidConfig, "format must be 'json' or 'csv'");
    return f;
}

moddev::ConvexBody body_of(const json& cfg) {
    if (!cfg.contains("body")) fail(Errc::InvalidConfig, "missing 'body'");
    return moddev::parse_body(cfg["body"]);
}

moddev::BaseDistribution distribution_of(const json& cfg) {
    if (!cfg.contains("distribution")) fail(Errc::InvalidConfig, "missing 'distribution'");
    return moddev::parse_distribution(cfg["distribution"]);
}

moddev::GrowthSchedule schedule_of(const json& cfg) {
    if (!cfg.contains("schedule")) fail(Errc::InvalidConfig, "missing 'schedule'");
    return moddev::parse_schedule(cfg["schedule"]);
}

// Gaussian comparison model: explicit "model" or derived from the
// increment distribution's covariance.
moddev::GaussianModel model_of(const json& cfg) {
    if (cfg.contains("model")) return moddev::parse_model(cfg["model"]);
    if (cfg.contains("distribution"))
        return moddev::build_gaussian(moddev::covariance(distribution_of(cfg)));
    fail(Errc::InvalidConfig, "missing 'model' (or 'distribution' to derive it from)");
}

// --- emission ---------------------------------------------------------------

struct Sink {
    std::ostream& stream() { return file.is_open() ? file : std::cout; }
    std::ofstream file;
};

Sink open_sink(const json& cfg) {
    Sink sink;
    if (cfg.contains("output")) {
        const std::string path = cfg["output"].get<std::string>();
        sink.file.open(path);
        if (!sink.file) fail(Errc::InvalidConfig, "cannot open output file " + path);
    }
    return sink;
}

void write_dominating(moddev::JsonWriter& w, const moddev::DominatingPoint& dp) {
    w.kv("a0", dp.a0);
    w.kv("lambda_star", dp.lambda_star);
    w.kv("v", dp.v);
    w.kv("sigma_g2", dp.sigma_g2);
    w.kv("f_unit", dp.f_unit);
    w.kv("t0", dp.t0);
    w.kv("kkt_residual", dp.kkt_residual);
}

void write_estimate_json(moddev::JsonWriter& w, const moddev::EstimateReport& r) {
    w.begin_object();
    w.kv("n", r.n);
    w.kv("b_n", r.b_n);
    w.kv("method", moddev::method_name(r.method));
    w.kv("p_hat", r.p_hat);
    w.kv("std_err", r.std_err);
    w.kv("ci_lo", r.ci_lo);
    w.kv("ci_hi", r.ci_hi);
    w.kv("samples", r.samples);
    w.kv("seed", static_cast<unsigned long long>(r.seed));
    if (r.ess) w.kv("ess", *r.ess);
    if (r.vr_factor) w.kv("vr_factor", *r.vr_factor);
    w.kv("ci_unreliable", r.ci_unreliable);
    if (r.method == moddev::Method::Tilted) w.kv("max_weight_hit", r.max_weight_hit);
    w.end_object();
}

void write_estimate_csv(std::ostream& os, const moddev::EstimateReport& r) {
    using moddev::format_double;
    os << r.n << ',' << format_double(r.b_n) << ',' << moddev::method_name(r.method)
       << ',' << format_double(r.p_hat) << ',' << format_double(r.std_err) << ','
       << format_double(r.ci_lo) << ',' << format_double(r.ci_hi) << ','
       << (r.ess ? format_double(*r.ess) : std::string()) << ',' << r.samples << ','
       << r.seed << '\n';
}

constexpr const char* kEstimateCsvHeader =
    "n,b_n,method,p_hat,std_err,ci_lo,ci_hi,ess,samples,seed";

// --- commands ---------------------------------------------------------------

int cmd_dominate(const json& cfg) {
    const moddev::GaussianModel model = model_of(cfg);
    const moddev::ConvexBody body = body_of(cfg);
    const moddev::ValidationReport val = moddev::validate_conditions(body, model);
    if (!val.passed())
        fail(Errc::InvalidSet, "set conditions failed: " +
                                   (val.detail.empty() ? "see report" : val.detail));
    const moddev::DominatingPoint dp = moddev::solve_dominating(model, body);

    Sink sink = open_sink(cfg);
    moddev::JsonWriter w(sink.stream());
    w.begin_object();
    w.kv("body", moddev::body_kind(body));
    write_dominating(w, dp);
    w.end_object();
    sink.stream() << '\n';
    return 0;
}

int cmd_estimate(const json& cfg) {
    const moddev::BaseDistribution base = distribution_of(cfg);
    const moddev::ConvexBody body = body_of(cfg);
    const moddev::GrowthSchedule schedule = schedule_of(cfg);
    if (!schedule.theorem_mode())
        std::cerr << "warning: alpha >= 2/3 is outside the range the asymptotic "
                     "formulas require; the estimate itself remains valid\n";
    const long n = require_long(cfg, "n");
    const long samples = samples_or(cfg, 100000);
    const std::uint64_t seed = require_seed(cfg);
    const int threads = threads_of(cfg);
    const std::string method = cfg.value("method", "both");

    std::vector<moddev::EstimateReport> rows;
    if (method == "naive") {
        rows.push_back(
            moddev::estimate_naive(base, n, schedule, body, samples, seed, threads));
    } else if (method == "tilted" || method == "both") {
        const moddev::GaussianModel model =
            moddev::build_gaussian(moddev::covariance(base));
        const moddev::DominatingPoint dp = moddev::solve_dominating(model, body);
        if (method == "tilted") {
            rows.push_back(moddev::estimate_tilted(base, n, schedule, body, dp,
                                                   samples, seed, threads));
        } else {
            auto [naive, tilted] = moddev::estimate_both(base, n, schedule, body, dp,
                                                         samples, seed, threads);
            rows.push_back(naive);
            rows.push_back(tilted);
        }
    } else {
        fail(Errc::InvalidConfig, "method must be naive, tilted or both");
    }
    // Rows echo the run-level seed; per-method sub-streams are derived
    // from it deterministically.
    for (auto& r : rows) r.seed = seed;

    Sink sink = open_sink(cfg);
    if (format_of(cfg, "csv") == "csv") {
        sink.stream() << kEstimateCsvHeader << '\n';
        for (const auto& r : rows) write_estimate_csv(sink.stream(), r);
    } else {
        moddev::JsonWriter w(sink.stream());
        w.begin_object();
        w.key("rows");
        w.begin_array();
        for (const auto& r : rows) write_estimate_json(w, r);
        w.end_array();
        w.end_object();
        sink.stream() << '\n';
    }
    return 0;
}

int cmd_asymptotic(const json& cfg) {
    const std::string which = cfg.value("which", "");
    Sink sink = open_sink(cfg);
    moddev::JsonWriter w(sink.stream());

    if (which == "t1-upper") {
        const moddev::GaussianModel model = model_of(cfg);
        const moddev::ConvexBody body = body_of(cfg);
        const moddev::GrowthSchedule schedule = schedule_of(cfg);
        const long n = require_long(cfg, "n");
        const moddev::DominatingPoint dp = moddev::solve_dominating(model, body);
        const double value =
            moddev::theorem1_upper(dp, static_cast<double>(n), schedule);
        w.begin_object();
        w.kv("which", which);
        w.kv("n", n);
        w.kv("b_n", schedule.b(static_cast<double>(n)));
        w.kv("value", value);
        write_dominating(w, dp);
        w.end_object();
    } else if (which == "t5-ball") {
        const moddev::GaussianModel model = model_of(cfg);
        const moddev::ConvexBody body = body_of(cfg);
        const auto* ball = std::get_if<moddev::Ball>(&body);
        if (!ball) fail(Errc::InvalidConfig, "t5-ball needs a ball body");
        const moddev::GrowthSchedule schedule = schedule_of(cfg);
        const long n = require_long(cfg, "n");
        const moddev::BallAsymptotic ba =
            moddev::theorem5_value(model, *ball, static_cast<double>(n), schedule);
        w.begin_object();
        w.kv("which", which);
        w.kv("n", n);
        w.kv("b_n", schedule.b(static_cast<double>(n)));
        w.kv("rho2", ba.rho2);
        w.kv("value", ba.value);
        w.kv("integral", ba.integral);
        w.kv("b_geom", ba.b_geom);
        w.kv("g2_eigs", ba.g2_eigs);
        write_dominating(w, ba.dp);
        w.end_object();
    } else if (which == "t4-gauss") {
        const moddev::GaussianModel model = model_of(cfg);
        const moddev::ConvexBody body = body_of(cfg);
        if (!cfg.contains("rho")) fail(Errc::InvalidConfig, "t4-gauss needs rho");
        const double rho = cfg["rho"].get<double>();
        const std::string method = cfg.value("method", "auto");
        moddev::GaussEstimator est = moddev::GaussEstimator::Auto;
        if (method == "naive") est = moddev::GaussEstimator::Naive;
        else if (method == "tilted") est = moddev::GaussEstimator::Tilted;
        else if (method != "auto")
            fail(Errc::InvalidConfig, "method must be auto, naive or tilted");
        const bool closed_form = std::holds_alternative<moddev::HalfSpace>(body) &&
                                 est == moddev::GaussEstimator::Auto;
        const long samples = samples_or(cfg, 1000000);
        const std::uint64_t seed = closed_form ? 0 : require_seed(cfg);
        const moddev::EstimateReport rep = moddev::gaussian_set_probability(
            model, body, rho, samples, seed, threads_of(cfg), est);
        w.begin_object();
        w.kv("which", which);
        w.kv("rho", rho);
        w.key("estimate");
        write_estimate_json(w, rep);
        w.end_object();
    } else if (which == "cm-check") {
        const moddev::GaussianModel model = model_of(cfg);
        const moddev::ConvexBody body = body_of(cfg);
        const auto* ball = std::get_if<moddev::Ball>(&body);
        if (!ball) fail(Errc::InvalidConfig, "cm-check needs a ball body");
        if (!cfg.contains("rho")) fail(Errc::InvalidConfig, "cm-check needs rho");
        const double rho = cfg["rho"].get<double>();
        const long samples = samples_or(cfg, 1000000);
        const std::uint64_t seed = require_seed(cfg);
        const moddev::CameronMartinCheck cm = moddev::cameron_martin_check(
            model, *ball, rho, samples, seed, threads_of(cfg));
        w.begin_object();
        w.kv("which", which);
        w.kv("rho", rho);
        w.key("lhs");
        write_estimate_json(w, cm.lhs);
        w.key("rhs");
        write_estimate_json(w, cm.rhs);
        w.kv("diff", cm.diff);
        w.kv("combined_se", cm.combined_se);
        w.kv("within_4se", std::abs(cm.diff) <= 4.0 * cm.combined_se);
        w.end_object();
    } else {
        fail(Errc::InvalidConfig,
             "asymptotic needs --which t1-upper|t4-gauss|t5-ball|cm-check");
    }
    sink.stream() << '\n';
    return 0;
}

int cmd_compare(const json& cfg) {
    const moddev::BaseDistribution base = distribution_of(cfg);
    const moddev::ConvexBody body = body_of(cfg);
    const moddev::GrowthSchedule schedule = schedule_of(cfg);
    if (!cfg.contains("n_list") || !cfg["n_list"].is_array())
        fail(Errc::InvalidConfig, "compare needs n_list");
    std::vector<long> n_list;
    for (const auto& v : cfg["n_list"]) n_list.push_back(v.get<long>());
    const long samples = samples_or(cfg, 1000000);
    const std::uint64_t seed = require_seed(cfg);

    const auto rows = moddev::ratio_experiment(base, body, schedule, n_list, samples,
                                               seed, threads_of(cfg));

    Sink sink = open_sink(cfg);
    using moddev::format_double;
    if (format_of(cfg, "csv") == "csv") {
        sink.stream()
            << "n,b_n,rho,p_sum,se_sum,p_gauss,se_gauss,ratio,ci_lo,ci_hi,theorem5\n";
        for (const auto& r : rows) {
            sink.stream() << r.n << ',' << format_double(r.b_n) << ','
                          << format_double(r.rho) << ',' << format_double(r.p_sum)
                          << ',' << format_double(r.se_sum) << ','
                          << format_double(r.p_gauss) << ','
                          << format_double(r.se_gauss) << ','
                          << format_double(r.ratio) << ',' << format_double(r.ci_lo)
                          << ',' << format_double(r.ci_hi) << ','
                          << (r.theorem5 ? format_double(*r.theorem5) : std::string())
                          << '\n';
        }
    } else {
        moddev::JsonWriter w(sink.stream());
        w.begin_object();
        w.key("rows");
        w.begin_array();
        for (const auto& r : rows) {
            w.begin_object();
            w.kv("n", r.n);
            w.kv("b_n", r.b_n);
            w.kv("rho", r.rho);
            w.kv("p_sum", r.p_sum);
            w.kv("se_sum", r.se_sum);
            w.kv("p_gauss", r.p_gauss);
            w.kv("se_gauss", r.se_gauss);
            w.kv("ratio", r.ratio);
            w.kv("ci_lo", r.ci_lo);
            w.kv("ci_hi", r.ci_hi);
            if (r.theorem5) w.kv("theorem5", *r.theorem5);
            w.end_object();
        }
        w.end_array();
        w.end_object();
        sink.stream() << '\n';
    }
    return 0;
}

int cmd_verify_repr(const json& cfg) {
    const moddev::BaseDistribution base = distribution_of(cfg);
    const moddev::ConvexBody body = body_of(cfg);
    const long n = require_long(cfg, "n");
    double b_n;
    if (cfg.contains("b_n")) {
        b_n = cfg["b_n"].get<double>();
    } else if (cfg.contains("schedule")) {
        b_n = schedule_of(cfg).b(static_cast<double>(n));
    } else {
        fail(Errc::InvalidConfig, "verify-repr needs b_n or a schedule");
    }
    const moddev::GaussianModel model =
        moddev::build_gaussian(moddev::covariance(base));
    const moddev::DominatingPoint dp = moddev::solve_dominating(model, body);
    const moddev::ReprDecomposition d = moddev::repr_exact(base, n, b_n, body, dp);

    Sink sink = open_sink(cfg);
    moddev::JsonWriter w(sink.stream());
    w.begin_object();
    w.kv("n", n);
    w.kv("b_n", b_n);
    w.kv("mode", "exact_enumeration");
    w.kv("prob", d.prob);
    w.kv("prefactor", d.prefactor);
    w.kv("j_n", d.j_n);
    w.kv("product", d.prefactor * d.j_n);
    w.kv("gap", d.gap);
    w.kv("rel_gap", d.prob > 0.0 ? d.gap / d.prob : 0.0);
    w.end_object();
    sink.stream() << '\n';
    return 0;
}

int cmd_slice_check(const json& cfg) {
    const moddev::GaussianModel model = model_of(cfg);
    const moddev::ConvexBody body = body_of(cfg);
    if (!cfg.contains("slice")) fail(Errc::InvalidConfig, "missing 'slice' spec");
    const moddev::SliceSpec spec = moddev::parse_slice_spec(cfg["slice"]);

    std::vector<double> grid;
    if (cfg.contains("grid")) {
        for (const auto& v : cfg["grid"]) grid.push_back(v.get<double>());
    } else {
        const int count = 20;
        for (int i = 1; i <= count; ++i)
            grid.push_back(spec.delta * static_cast<double>(i) / count);
    }

    const moddev::DominatingPoint dp = moddev::solve_dominating(model, body);
    const moddev::SliceReport rep =
        moddev::check_slice_domination(body, dp, spec, grid);

    Sink sink = open_sink(cfg);
    if (format_of(cfg, "json") == "csv") {
        sink.stream() << "s,width,tau,margin\n";
        for (const auto& row : rep.rows)
            sink.stream() << moddev::format_double(row.s) << ','
                          << moddev::format_double(row.width) << ','
                          << moddev::format_double(row.tau) << ','
                          << moddev::format_double(row.margin) << '\n';
    } else {
        moddev::JsonWriter w(sink.stream());
        w.begin_object();
        w.kv("dominated", rep.dominated);
        w.key("rows");
        w.begin_array();
        for (const auto& row : rep.rows) {
            w.begin_object();
            w.kv("s", row.s);
            w.kv("width", row.width);
            w.kv("tau", row.tau);
            w.kv("margin", row.margin);
            w.end_object();
        }
        w.end_array();
        w.end_object();
        sink.stream() << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"moderate-deviation probability laboratory"};
    app.require_subcommand(1);

    CliArgs args;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", args.config_path, "JSON config file");
        sub->add_option("--model", args.model_json, "model JSON (inline)");
        sub->add_option("--distribution", args.dist_json, "distribution JSON (inline)");
        sub->add_option("--body", args.body_json, "body JSON (inline)");
        sub->add_option("--alpha", args.alpha, "schedule exponent");
        sub->add_option("--c", args.c, "schedule coefficient");
        sub->add_option("--n", args.n, "number of increments");
        sub->add_option("--n-list", args.n_list, "list of n values");
        sub->add_option("--b-n", args.b_n, "explicit b_n");
        sub->add_option("--rho", args.rho, "Gaussian scaling rho");
        sub->add_option("--samples", args.samples, "Monte Carlo replications");
        sub->add_option("--seed", args.seed, "RNG seed (required when stochastic)");
        sub->add_option("--threads", args.threads, "worker threads");
        sub->add_option("--format", args.format, "json or csv");
        sub->add_option("--output", args.output, "output path (default stdout)");
        sub->add_option("--method", args.method, "naive, tilted or both");
        return sub;
    };

    auto* dominate = add_common(app.add_subcommand(
        "dominate", "dominating point and supporting functional"));
    auto* estimate = add_common(app.add_subcommand(
        "estimate", "estimate P(S_n in b_n D), naive and/or tilted"));
    auto* asymptotic = add_common(app.add_subcommand(
        "asymptotic", "closed-form asymptotics and Gaussian checks"));
    asymptotic->add_option("--which", args.which,
                           "t1-upper | t4-gauss | t5-ball | cm-check");
    auto* compare = add_common(app.add_subcommand(
        "compare", "ratio experiment against the Gaussian limit"));
    auto* verify_repr = add_common(app.add_subcommand(
        "verify-repr", "exact representation-formula decomposition"));
    auto* slice_check = add_common(app.add_subcommand(
        "slice-check", "slice-domination margins near the dominating point"));
    slice_check->add_option("--slice", args.slice_json, "slice spec JSON");
    slice_check->add_option("--grid", args.grid, "slice offsets s");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const json cfg = load_config(args);
        if (dominate->parsed()) return cmd_dominate(cfg);
        if (estimate->parsed()) return cmd_estimate(cfg);
        if (asymptotic->parsed()) return cmd_asymptotic(cfg);
        if (compare->parsed()) return cmd_compare(cfg);
        if (verify_repr->parsed()) return cmd_verify_repr(cfg);
        if (slice_check->parsed()) return cmd_slice_check(cfg);
        return 2;
    } catch (const moddev::Error& e) {
        std::cerr << "{\"error\":\"" << moddev::errc_name(e.code())
                  << "\",\"message\":" << nlohmann::json(e.what()).dump() << "}\n";
        return moddev::is_numerical_failure(e.code()) ? 3 : 2;
    } catch (const std::exception& e) {
        std::cerr << "{\"error\":\"Internal\",\"message\":"
                  << nlohmann::json(e.what()).dump() << "}\n";
        return 3;
    }
}
