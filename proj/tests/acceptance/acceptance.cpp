// Acceptance checks, one [PASS]/[FAIL] line per criterion.
// Usage: acceptance [--only 1,5,10]

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "netfx/netfx.hpp"

using namespace netfx;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v, int prec = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    return buf;
}

double median(std::vector<double> v) { return quantile_type7(v, 0.5); }

ExperimentConfig load_config(const std::string& name) {
    return config_from_json(read_json_file(std::string(NETFX_CONFIG_DIR) + "/" + name));
}

// Linear-family Gaussian DGP shared by criteria 1, 4 and 8.
GaussianDgpConfig gaussian_dgp(std::size_t n, std::size_t t1, std::size_t t2, double gamma = 0.2) {
    GaussianDgpConfig cfg;
    cfg.n_units = n;
    cfg.design = {.pi1 = 0.2, .pi2 = 0.5, .t1 = t1, .t2 = t2, .mode = DesignMode::TwoStageStatic};
    cfg.model = LinearOutcomeParams{.delta = 0.0, .xi = 0.5, .lambda = 1.0, .gamma = gamma, .theta_bar = 0.0};
    const double s = std::sqrt(0.125);
    cfg.interference = {.mu = 0.5, .sigma = s, .mu_t = 0.5, .sigma_t = s};
    cfg.noise.sigma_e = 0.3;
    cfg.burn_in = 0;
    return cfg;
}

std::pair<double, double> se_errors(std::size_t n, std::uint64_t seed) {
    const auto cfg = gaussian_dgp(n, 10, 10);
    const auto panel = simulate_panel(cfg, StreamFactory(seed, "se-concentration/n=" + std::to_string(n)));
    const auto emp = empirical_moments(panel);
    const auto se = se_trajectory(emp[0], cfg.design, cfg.model, cfg.interference, cfg.noise);
    double em = 0.0, es = 0.0;
    for (std::size_t t = 0; t < emp.size(); ++t) {
        em = std::max(em, std::abs(emp[t].nu - se[t].nu));
        es = std::max(es, std::abs(emp[t].rho - se[t].rho));
    }
    return {em, es};
}

Verdict c1_state_evolution_concentration() {
    std::size_t good = 0;
    std::vector<double> m10k, s10k;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto [em, es] = se_errors(10000, seed);
        m10k.push_back(em);
        s10k.push_back(es);
        good += em <= 0.05 && es <= 0.05;
    }
    std::vector<double> m500, s500;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto [em, es] = se_errors(500, seed);
        m500.push_back(em);
        s500.push_back(es);
    }
    const double mm500 = median(m500), mm10k = median(m10k), ms500 = median(s500), ms10k = median(s10k);
    return {good >= 18 && mm10k < mm500 && ms10k < ms500,
            "N=10000 within 0.05 in " + std::to_string(good) + "/20 seeds; median mean-error " + fmt(mm500) + " -> " +
                fmt(mm10k) + ", median sd-error " + fmt(ms500) + " -> " + fmt(ms10k)};
}

Verdict c2_quadrature_equivalence() {
    std::mt19937_64 gen(2);
    std::uniform_real_distribution<double> coef(-1.0, 1.0), rho(0.0, 2.0), prob(0.0, 1.0), pos(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        LinearOutcomeParams p{.delta = coef(gen), .xi = coef(gen), .lambda = coef(gen), .gamma = coef(gen),
                              .theta_bar = coef(gen)};
        const SEState s{coef(gen), rho(gen)};
        const InterferenceSpec is{.mu = coef(gen), .sigma = pos(gen), .mu_t = coef(gen), .sigma_t = pos(gen)};
        const NoiseSpec ns{pos(gen)};
        const double pi = prob(gen);
        const auto a = se_step_linear(s, p, pi, is, ns);
        const auto b = se_step_general(s, as_outcome_function(p), pi, is, ns, {.nodes_or_draws = 64});
        worst = std::max({worst, std::abs(a.nu - b.nu), std::abs(a.rho - b.rho)});
    }
    return {worst <= 1e-8, "max |linear - Gauss-Hermite| over 1000 draws = " + fmt(worst, 3)};
}

Verdict c3_regression_exactness() {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst_p = 0.0, worst_t = 0.0;
    for (int i = 0; i < 500; ++i) {
        const LinearOutcomeParams p{.delta = 2 * u(gen) - 1, .xi = 0.1 + 0.7 * u(gen), .lambda = 4 * u(gen) - 2,
                                    .gamma = 0.4 * u(gen) - 0.2, .theta_bar = 2 * u(gen) - 1};
        const double pi1 = 0.4 * u(gen);
        const double pi2 = pi1 + 0.1 + 0.5 * u(gen);
        const ExperimentDesign d{.pi1 = pi1, .pi2 = pi2, .t1 = 30, .t2 = 30};
        const SEState init{4 * u(gen) - 2, 1.0};
        std::vector<double> nu, nu1, nu0;
        for (const auto& s : se_trajectory(init, d, p, {}, {})) nu.push_back(s.nu);
        for (const auto& s : se_trajectory(init, d.all_treated(), p, {}, {})) nu1.push_back(s.nu);
        for (const auto& s : se_trajectory(init, d.all_control(), p, {}, {})) nu0.push_back(s.nu);
        const auto fit = estimate_tte_from_means(nu, d);
        worst_p = std::max({worst_p, std::abs(fit.params.xi_hat - p.xi), std::abs(fit.params.gamma_hat - p.gamma),
                            std::abs(fit.params.lambda_hat - p.lambda)});
        for (std::size_t t = 0; t < nu.size(); ++t) worst_t = std::max(worst_t, std::abs(fit.tte[t] - (nu1[t] - nu0[t])));
    }
    return {worst_p <= 1e-9 && worst_t <= 1e-7,
            "500 models: max parameter error " + fmt(worst_p, 3) + ", max trajectory error " + fmt(worst_t, 3)};
}

Verdict c4_consistency() {
    std::vector<double> med;
    std::string detail = "median |TTE_T error|:";
    for (std::size_t n : {500u, 2000u, 10000u}) {
        auto c = default_config(Scenario::GaussianLinear);
        const auto g = gaussian_dgp(n, 10, 10);
        c.n_units = n;
        c.design = g.design;
        c.burn_in = 0;
        c.gaussian.params = std::get<LinearOutcomeParams>(g.model);
        c.gaussian.interference = g.interference;
        c.gaussian.noise = g.noise;
        c.replications = 100;
        c.ci = false;
        c.master_seed = 4000 + n;
        const auto res = run_experiment(c);
        std::vector<double> err;
        for (const auto& r : res.records) err.push_back(std::abs(r.estimate.back() - r.truth.back()));
        med.push_back(err.empty() ? INFINITY : median(err));
        detail += " N=" + std::to_string(n) + ": " + fmt(med.back()) + " (" + std::to_string(res.failures.size()) +
                  " failed)";
    }
    const double ratio = med[2] / med[0];
    detail += "; ratio 10000/500 = " + fmt(ratio);
    return {med[0] > med[1] && med[1] > med[2] && ratio <= 0.25, detail};
}

// Criterion 5's run is reused by criterion 10.
std::optional<ExperimentResult> g_fig2_run;

const ExperimentResult& fig2_run() {
    if (!g_fig2_run) g_fig2_run = run_experiment(load_config("fig2_linear_in_means.json"));
    return *g_fig2_run;
}

Verdict c5_linear_in_means() {
    const auto& res = fig2_run();
    if (!res.aggregate) return {false, "no successful replications"};
    const auto& a = *res.aggregate;
    const std::size_t t = a.length() - 1;
    const double gap = std::abs(a.mean_estimate[t] - a.mean_truth[t]);
    const double cov = a.coverage[t];
    return {gap <= 0.1 * std::abs(a.mean_truth[t]) && cov >= 0.85 && cov <= 0.99,
            "mean estimate " + fmt(a.mean_estimate[t]) + " vs truth " + fmt(a.mean_truth[t]) + " (gap " + fmt(gap) +
                "), coverage at T " + fmt(cov) + ", " + std::to_string(res.failures.size()) + " failures"};
}

Verdict c6_binary_mrt() {
    const auto cfg = load_config("fig3_binary_mrt.json");
    const auto graph = *experiment_graph(cfg);
    const auto spec = cfg.resample_spec(cfg.n_units);
    const StreamFactory root(cfg.master_seed);
    const std::size_t reps = cfg.replications;
    std::vector<double> bias(reps, NAN);
    std::vector<char> binary(reps, 1), bounded(reps, 1);
    parallel_for(reps, [&](std::size_t r) {
        const auto streams = root.child("rep=" + std::to_string(r));
        const auto sim = simulate_replication(cfg, &graph, streams);
        for (const auto* p : {&sim.observed, &sim.twins.all_control, &sim.twins.all_treated})
            for (double v : p->outcomes.data())
                if (v != 0.0 && v != 1.0) binary[r] = 0;
        try {
            const auto est = estimate_tte_trajectory(sim.observed, cfg.design, cfg.estimator).estimate;
            const auto ci = resample_tte_ci(sim.observed, cfg.design, cfg.estimator, spec, streams.child("ci"));
            for (const auto* v : {&est, &ci.ci_low, &ci.ci_high, &ci.center})
                for (double x : *v)
                    if (!(x >= -1.0 && x <= 1.0)) bounded[r] = 0;
            bias[r] = est.back() - sim.twins.tte_truth.back();
        } catch (const error&) {
        }
    });
    double sum = 0.0;
    std::size_t ok = 0;
    for (double b : bias)
        if (!std::isnan(b)) {
            sum += b;
            ++ok;
        }
    const bool all_binary = std::all_of(binary.begin(), binary.end(), [](char c) { return c != 0; });
    const bool all_bounded = std::all_of(bounded.begin(), bounded.end(), [](char c) { return c != 0; });
    const double mean_bias = ok ? sum / static_cast<double>(ok) : INFINITY;
    return {all_binary && all_bounded && ok == reps && std::abs(mean_bias) <= 0.05,
            std::string("outcomes binary: ") + (all_binary ? "yes" : "no") +
                ", estimates and bands in [-1,1]: " + (all_bounded ? "yes" : "no") + ", mean bias at T " +
                fmt(mean_bias) + " over " + std::to_string(ok) + "/" + std::to_string(reps) + " replications"};
}

Verdict c7_queue() {
    auto cfg = load_config("fig4_jsq_queue.json");
    cfg.replications = 100;
    cfg.ci = false;
    const auto res = run_experiment(cfg);
    std::size_t negative = 0, agree = 0;
    for (const auto& r : res.records) {
        const double truth = r.truth.back(), est = r.estimate.back();
        negative += truth < 0.0;
        agree += (truth < 0.0 && est < 0.0) || (truth > 0.0 && est > 0.0) || (truth == 0.0 && est == 0.0);
    }
    const std::size_t reps = cfg.replications;

    QueueConfig one;
    one.params.treated_service_rate = one.params.base_service_rate;
    one.design = {.pi1 = 0.0, .pi2 = 1.0, .t1 = 100000, .t2 = 100000};
    one.burn_in = 1000;
    const auto panel = simulate_jsq_queue(1, one, StreamFactory(cfg.master_seed, "mm1"));
    double busy = 0.0;
    for (std::size_t t = 0; t <= panel.horizon; ++t) busy += panel.outcome(0, t);
    busy /= static_cast<double>(panel.horizon + 1);

    return {res.records.size() == reps && negative * 100 >= 95 * reps && agree * 100 >= 90 * reps &&
                std::abs(busy - 0.95) <= 0.02,
            "truth negative " + std::to_string(negative) + "/" + std::to_string(reps) + ", sign agreement " +
                std::to_string(agree) + "/" + std::to_string(reps) + ", M/M/1 busy fraction " + fmt(busy, 5)};
}

struct BiasCheck {
    double mean_diff = 0.0;
    double se = 0.0;
    double mean_measured = 0.0;
    double mean_predicted = 0.0;
};

BiasCheck equilibrium_bias_check(double gamma) {
    const std::size_t n = 2000, reps = 50, horizon = 200;
    auto cfg = gaussian_dgp(n, horizon / 2, horizon / 2, gamma);
    const auto& lp = std::get<LinearOutcomeParams>(cfg.model);
    const double pi1 = cfg.design.pi1, pi2 = cfg.design.pi2;
    std::vector<double> measured(reps), predicted(reps);
    for (std::size_t r = 0; r < reps; ++r) {
        const StreamFactory streams(8000 + r, gamma == 0.0 ? "equilibrium/null" : "equilibrium");
        auto static_assignment = [&](double pi, const std::string& label) {
            Rng rng = streams.spawn(label);
            Matrix<double> w(horizon, n, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                const double v = rng.bernoulli(pi) ? 1.0 : 0.0;
                for (std::size_t t = 0; t < horizon; ++t) w(t, i) = v;
            }
            return w;
        };
        const std::vector<Matrix<double>> runs{static_assignment(pi1, "w/pi1"), static_assignment(pi2, "w/pi2"),
                                               constant_treatments(horizon, n, 1.0),
                                               constant_treatments(horizon, n, 0.0)};
        const auto panels = simulate_coupled(cfg, runs, streams);
        std::vector<double> y;
        for (const auto& p : panels) y.push_back(sample_means(p).back());
        measured[r] = tte_equilibrium(y[0], y[1], pi1, pi2) - (y[2] - y[3]);
        predicted[r] = equilibrium_bias(lp.xi * cfg.interference.total_mean(),
                                        lp.gamma * cfg.interference.total_mean(), pi1, pi2, y[0], y[1], y[2]);
    }
    BiasCheck out;
    double ss = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
        out.mean_diff += measured[r] - predicted[r];
        out.mean_measured += measured[r];
        out.mean_predicted += predicted[r];
    }
    const auto rd = static_cast<double>(reps);
    out.mean_diff /= rd;
    out.mean_measured /= rd;
    out.mean_predicted /= rd;
    for (std::size_t r = 0; r < reps; ++r) {
        // gamma = 0 compares the measured bias with 0; otherwise the paired difference.
        const double d = gamma == 0.0 ? measured[r] : measured[r] - predicted[r];
        const double m = gamma == 0.0 ? out.mean_measured : out.mean_diff;
        ss += (d - m) * (d - m);
    }
    out.se = std::sqrt(ss / (rd - 1.0) / rd);
    return out;
}

Verdict c8_equilibrium_bias() {
    const auto with = equilibrium_bias_check(0.2);
    const auto without = equilibrium_bias_check(0.0);
    const bool ok_with = std::abs(with.mean_diff) <= 3.0 * with.se;
    const bool ok_without = std::abs(without.mean_measured) <= 3.0 * without.se;
    return {ok_with && ok_without,
            "gamma=0.2: measured " + fmt(with.mean_measured) + " vs formula " + fmt(with.mean_predicted) +
                " (paired diff " + fmt(with.mean_diff, 3) + ", 3 SE " + fmt(3 * with.se, 3) + "); gamma=0: measured " +
                fmt(without.mean_measured, 3) + " (3 SE " + fmt(3 * without.se, 3) + ")"};
}

Verdict c9_edge_list() {
    std::string snap;
    if (const char* env = std::getenv("NETFX_FACEBOOK_EDGES")) snap = env;
    for (const char* candidate : {"data/facebook_combined.txt", "facebook_combined.txt"})
        if (snap.empty() && fs::exists(candidate)) snap = candidate;
    if (!snap.empty() && fs::exists(snap)) {
        const auto g = load_edge_list(snap);
        return {g.n_vertices() == 4039 && g.edge_count() == 88234,
                snap + ": " + std::to_string(g.n_vertices()) + " vertices, " + std::to_string(g.edge_count()) +
                    " edges"};
    }
    const std::string fixture = std::string(NETFX_FIXTURE_DIR) + "/synthetic_edges.txt";
    std::ifstream is(fixture);
    std::size_t lines = 0;
    for (std::string l; std::getline(is, l);) ++lines;
    EdgeListStats st;
    const auto g = load_edge_list(fixture, &st);
    std::size_t hist_total = 0;
    for (const auto& [d, c] : degree_histogram(g)) hist_total += c;
    return {lines == 100 && g.n_vertices() == 60 && g.edge_count() == 95 && st.self_loops == 1 &&
                st.duplicates == 2 && hist_total == 60 && g.invariants_hold(),
            "SNAP file absent; fixture (" + std::to_string(lines) + " lines): " + std::to_string(g.n_vertices()) +
                " vertices, " + std::to_string(g.edge_count()) + " edges, " + std::to_string(st.self_loops) +
                " self-loop, " + std::to_string(st.duplicates) + " duplicates"};
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

Verdict c10_determinism() {
    const fs::path base = fs::temp_directory_path() / "netfx_acceptance_determinism";
    fs::remove_all(base);
    write_experiment(fig2_run(), base / "a");
    const auto again = run_experiment(load_config("fig2_linear_in_means.json"));
    write_experiment(again, base / "b");
    std::size_t files = 0, same = 0;
    for (const auto& e : fs::directory_iterator(base / "a")) {
        ++files;
        same += slurp(e.path()) == slurp(base / "b" / e.path().filename());
    }
    std::size_t files_b = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(base / "b")) ++files_b;
    fs::remove_all(base);
    return {files > 0 && files == same && files == files_b,
            std::to_string(same) + "/" + std::to_string(files) + " output files byte-identical"};
}

struct Criterion {
    int id;
    const char* name;
    double budget_seconds;
    std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria"};
    std::vector<int> only;
    app.add_option("--only", only, "criterion ids to run")->delimiter(',');
    CLI11_PARSE(app, argc, argv);

    const std::vector<Criterion> all{
        {1, "state-evolution concentration", 300, c1_state_evolution_concentration},
        {2, "closed-form / quadrature equivalence", 60, c2_quadrature_equivalence},
        {3, "regression exactness", 60, c3_regression_exactness},
        {4, "consistency in N", 900, c4_consistency},
        {5, "linear-in-means scenario", 1800, c5_linear_in_means},
        {6, "binary MRT scenario", 1200, c6_binary_mrt},
        {7, "JSQ queue scenario", 1800, c7_queue},
        {8, "equilibrium bias formula", 600, c8_equilibrium_bias},
        {9, "edge-list ingestion", 60, c9_edge_list},
        {10, "determinism", 3600, c10_determinism},
    };
    const std::set<int> selected(only.begin(), only.end());
    int failed = 0;
    for (const auto& c : all) {
        if (!selected.empty() && !selected.count(c.id)) continue;
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = secs <= c.budget_seconds;
        const bool pass = v.pass && in_time;
        failed += !pass;
        std::cout << (pass ? "[PASS] " : "[FAIL] ") << c.id << ". " << c.name << ": " << v.detail << " ("
                  << fmt(secs, 3) << " s" << (in_time ? "" : ", over budget") << ")" << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
