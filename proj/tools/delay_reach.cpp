// delay-reach: batch front end for reachability analysis of difference
// delay systems with distributed delays.
//
// Exit codes: 0 pass/success, 1 negative verdict, 2 inconclusive,
// 3..6 schema/grid/shape/file errors, 7 usage errors.

#include <complex>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "delayreach/bezout.hpp"
#include "delayreach/hautus.hpp"
#include "delayreach/io.hpp"
#include "delayreach/laplace.hpp"
#include "delayreach/measure.hpp"
#include "delayreach/reach.hpp"
#include "delayreach/system.hpp"

namespace dr = delayreach;
namespace fs = std::filesystem;

namespace {

struct Options {
    std::string command;
    std::string spec_path;
    std::string target_path;
    std::string input_path;
    std::string bezout_path;
    std::vector<double> strip;  // re_min, re_max, im_min, im_max
    double density = 0.05;
    double tol = 1e-8;
    double T = 0.0;
    double T_out = 0.0;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    int max_degree = -1;
};

dr::json base_report(const Options& opt, const dr::LoadedSpec& loaded) {
    dr::json j;
    j["command"] = opt.command;
    j["schema"] = "delay-reach-report/1";
    j["seed"] = opt.seed;
    j["spec_hash"] = loaded.hash;
    j["tolerances"] = {{"tol", opt.tol}, {"density", opt.density}};
    j["tool_version"] = dr::kToolVersion;
    return j;
}

std::string out_path(const Options& opt, const std::string& name) {
    fs::create_directories(opt.out_dir);
    return (fs::path(opt.out_dir) / name).string();
}

dr::json complex_json(std::complex<double> z) { return {{"re", z.real()}, {"im", z.imag()}}; }

dr::json witness_json(const dr::HautusWitness& w) {
    dr::json j;
    j["at_limit"] = w.at_limit;
    j["location"] = complex_json(w.location);
    dr::json g = dr::json::array();
    for (Eigen::Index i = 0; i < w.g.size(); ++i) g.push_back(complex_json(w.g(i)));
    j["left_vector"] = g;
    return j;
}

int run_bound(const Options& opt) {
    dr::LoadedSpec loaded = dr::load_spec(opt.spec_path);
    dr::json rep = base_report(opt, loaded);
    rep["minimal_time_bound"] = dr::minimal_time_bound(loaded.spec);
    dr::write_report(out_path(opt, "report.json"), rep);
    return 0;
}

int run_simulate(const Options& opt) {
    dr::LoadedSpec loaded = dr::load_spec(opt.spec_path);
    if (opt.input_path.empty())
        throw dr::IoError(dr::IoError::Schema, "simulate: --input is required");
    if (!(opt.T_out > 0.0))
        throw dr::IoError(dr::IoError::Schema, "simulate: --T must be positive");
    dr::GridSignal u = dr::read_signal_csv(opt.input_path, loaded.spec.h, loaded.spec.m);
    auto sim = dr::simulate(loaded.spec, u, opt.T_out);
    dr::write_signal_csv(out_path(opt, "state.csv"), sim.x);
    dr::write_signal_csv(out_path(opt, "output.csv"), sim.y);
    dr::json rep = base_report(opt, loaded);
    rep["T"] = opt.T_out;
    rep["output_l1_norm"] = sim.y.l1_norm();
    dr::write_report(out_path(opt, "report.json"), rep);
    return 0;
}

int run_hautus(const Options& opt, const std::string& method) {
    dr::LoadedSpec loaded = dr::load_spec(opt.spec_path);
    const bool want_exact =
        method == "exact" || (method == "auto" && !loaded.spec.has_density() && loaded.spec.d <= 4);

    dr::json rep = base_report(opt, loaded);
    dr::HautusReport hr;
    if (want_exact) {
        hr = dr::hautus_exact_commensurate(loaded.spec, opt.tol);
    } else if (opt.strip.size() == 4) {
        hr = dr::hautus_grid_check(loaded.spec, opt.strip[0], opt.strip[1], opt.strip[2],
                                   opt.strip[3], opt.density, opt.tol);
    } else {
        hr = dr::hautus_grid_check(loaded.spec, opt.density, opt.tol);
    }
    rep["method"] = hr.method;
    rep["min_margin"] = hr.min_margin;
    rep["limit_margin"] = hr.limit_margin;
    rep["verdict"] = hr.verdict == dr::Verdict::Pass
                         ? "pass"
                         : (hr.verdict == dr::Verdict::Fail ? "fail" : "inconclusive");
    if (hr.witness) rep["witness"] = witness_json(*hr.witness);
    dr::write_report(out_path(opt, "report.json"), rep);
    return hr.verdict == dr::Verdict::Pass ? 0 : (hr.verdict == dr::Verdict::Fail ? 1 : 2);
}

int run_bezout(const Options& opt) {
    dr::LoadedSpec loaded = dr::load_spec(opt.spec_path);
    dr::json rep = base_report(opt, loaded);
    auto [Q, P] = dr::build_QP(loaded.spec);
    if (!opt.bezout_path.empty()) {
        dr::BezoutFile bf = dr::read_bezout(opt.bezout_path, loaded.spec.h);
        auto [ok, res] = dr::verify_bezout(Q, P, bf.R, bf.S, opt.tol);
        rep["mode"] = "verify";
        rep["residual"] = res;
        rep["verdict"] = ok ? "pass" : "fail";
        dr::write_report(out_path(opt, "report.json"), rep);
        return ok ? 0 : 1;
    }
    dr::BezoutFailure failure;
    auto pair = dr::solve_bezout_commensurate(loaded.spec, opt.tol, opt.max_degree, &failure);
    rep["mode"] = "solve";
    if (pair) {
        rep["verdict"] = "pass";
        rep["residual"] = pair->residual;
        rep["degree"] = pair->degree;
        dr::write_bezout(out_path(opt, "bezout.json"), pair->R, pair->S, loaded.spec.h);
    } else {
        // evidence against left-coprimeness up to the tried degree, never a proof
        rep["verdict"] = "fail";
        rep["best_residual"] = failure.best_residual;
        rep["max_degree_tried"] = failure.max_degree_tried;
    }
    dr::write_report(out_path(opt, "report.json"), rep);
    return pair ? 0 : 1;
}

dr::MatrixMeasure obtain_S(const Options& opt, const dr::LoadedSpec& loaded) {
    if (!opt.bezout_path.empty())
        return dr::read_bezout(opt.bezout_path, loaded.spec.h).S;
    if (loaded.spec.has_density())
        throw dr::IoError(dr::IoError::Schema,
                          "a Bezout pair (--bezout) must be supplied for systems with a "
                          "distributed density; no general synthesis exists");
    auto pair = dr::solve_bezout_commensurate(loaded.spec, 1e-9, opt.max_degree);
    if (!pair)
        throw dr::IoError(dr::IoError::Schema,
                          "no Bezout pair found up to the degree cap; system appears not "
                          "left-coprime");
    return pair->S;
}

int run_plan(const Options& opt) {
    dr::LoadedSpec loaded = dr::load_spec(opt.spec_path);
    if (opt.target_path.empty())
        throw dr::IoError(dr::IoError::Schema, "plan: --target is required");
    dr::GridSignal psi = dr::read_signal_csv(opt.target_path, loaded.spec.h, loaded.spec.d);
    dr::MatrixMeasure S = obtain_S(opt, loaded);
    double resid = 0.0;
    dr::GridSignal omega = dr::plan_control(loaded.spec, S, psi, opt.tol, &resid);
    dr::write_signal_csv(out_path(opt, "control.csv"), omega);
    dr::json rep = base_report(opt, loaded);
    rep["state_residual"] = resid;
    rep["control_l1_norm"] = omega.l1_norm();
    dr::write_report(out_path(opt, "report.json"), rep);
    return 0;
}

int run_compress(const Options& opt) {
    dr::LoadedSpec loaded = dr::load_spec(opt.spec_path);
    if (opt.input_path.empty())
        throw dr::IoError(dr::IoError::Schema, "compress: --input is required");
    if (!(opt.T > 0.0)) throw dr::IoError(dr::IoError::Schema, "compress: --T is required");
    dr::GridSignal omega = dr::read_signal_csv(opt.input_path, loaded.spec.h, loaded.spec.m);
    dr::GridSignal alpha = dr::compress_control(loaded.spec, omega, opt.T);
    dr::write_signal_csv(out_path(opt, "control.csv"), alpha);
    dr::json rep = base_report(opt, loaded);
    rep["T"] = opt.T;
    rep["compressed_l1_norm"] = alpha.l1_norm();
    dr::write_report(out_path(opt, "report.json"), rep);
    return 0;
}

int run_verify(const Options& opt) {
    dr::LoadedSpec loaded = dr::load_spec(opt.spec_path);
    if (opt.target_path.empty())
        throw dr::IoError(dr::IoError::Schema, "verify: --target is required");
    dr::GridSignal psi = dr::read_signal_csv(opt.target_path, loaded.spec.h, loaded.spec.d);
    dr::MatrixMeasure S = obtain_S(opt, loaded);
    const double T = opt.T > 0.0 ? opt.T : dr::minimal_time_bound(loaded.spec) + loaded.spec.h;
    dr::ReachReport rr = dr::reach_and_verify(loaded.spec, S, psi, T, opt.tol);
    dr::write_signal_csv(out_path(opt, "control.csv"), rr.compressed);
    dr::write_signal_csv(out_path(opt, "output.csv"), rr.output);
    dr::json rep = base_report(opt, loaded);
    rep["T"] = T;
    rep["check_time"] = rr.check_time;
    rep["l1_error"] = rr.l1_error;
    rep["state_residual"] = rr.state_residual;
    rep["verdict"] = rr.pass ? "pass" : "fail";
    dr::write_report(out_path(opt, "report.json"), rep);
    return rr.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"reachability analysis of difference delay systems with distributed delays"};
    app.require_subcommand(1);

    Options opt;
    std::string hautus_method = "auto";

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--spec", opt.spec_path, "system spec JSON")->required();
        sub->add_option("--out", opt.out_dir, "output directory (default: .)");
        sub->add_option("--tol", opt.tol, "acceptance tolerance");
        sub->add_option("--seed", opt.seed, "seed recorded in the report");
    };

    CLI::App* bound = app.add_subcommand("bound", "minimal-time reachability bound");
    add_common(bound);

    CLI::App* simulate = app.add_subcommand("simulate", "forward simulation of the system");
    add_common(simulate);
    simulate->add_option("--input", opt.input_path, "control signal CSV");
    simulate->add_option("--T", opt.T_out, "simulation end time");

    CLI::App* hautus = app.add_subcommand("hautus", "frequency-domain rank test");
    add_common(hautus);
    hautus->add_option("--method", hautus_method, "grid | exact | auto");
    hautus->add_option("--strip", opt.strip, "scan strip re_min,re_max,im_min,im_max")
        ->delimiter(',')
        ->expected(4);
    hautus->add_option("--density", opt.density, "scan grid spacing");

    CLI::App* bezout = app.add_subcommand("bezout", "solve or verify the Bezout identity");
    add_common(bezout);
    bezout->add_option("--bezout", opt.bezout_path, "pair to verify (omit to solve)");
    bezout->add_option("--max-degree", opt.max_degree, "degree cap override");

    CLI::App* plan = app.add_subcommand("plan", "motion planning omega = S*Q*psi");
    add_common(plan);
    plan->add_option("--target", opt.target_path, "target signal CSV");
    plan->add_option("--bezout", opt.bezout_path, "Bezout pair JSON");
    plan->add_option("--max-degree", opt.max_degree, "degree cap override");

    CLI::App* compress = app.add_subcommand("compress", "support compression of a control");
    add_common(compress);
    compress->add_option("--input", opt.input_path, "control signal CSV");
    compress->add_option("--T", opt.T, "support bound");

    CLI::App* verify = app.add_subcommand("verify", "plan, compress, simulate, compare");
    add_common(verify);
    verify->add_option("--target", opt.target_path, "target signal CSV");
    verify->add_option("--bezout", opt.bezout_path, "Bezout pair JSON");
    verify->add_option("--T", opt.T, "support bound (default: minimal bound + h)");
    verify->add_option("--max-degree", opt.max_degree, "degree cap override");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 7;
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        opt.command = sub->get_name();
        if (sub == bound) return run_bound(opt);
        if (sub == simulate) return run_simulate(opt);
        if (sub == hautus) return run_hautus(opt, hautus_method);
        if (sub == bezout) return run_bezout(opt);
        if (sub == plan) return run_plan(opt);
        if (sub == compress) return run_compress(opt);
        if (sub == verify) return run_verify(opt);
    } catch (const dr::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.kind);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 6;
    }
    return 7;
}
