// Acceptance checks for the fedgrid toolkit. Prints one PASS/FAIL line per
// criterion and exits non-zero if any criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "fedgrid/accounting.hpp"
#include "fedgrid/chain.hpp"
#include "fedgrid/errors.hpp"
#include "fedgrid/fedlearn.hpp"
#include "fedgrid/reference_data.hpp"
#include "fedgrid/run.hpp"
#include "fedgrid/simulation.hpp"

using namespace fedgrid;
namespace fs = std::filesystem;

namespace {

// Tolerances and budgets.
constexpr double kTable4BudgetSeconds = 1.0;
constexpr double kCo2Tolerance = 1e-6;
constexpr double kOneStepRelTolerance = 1e-9;
constexpr double kOneStepBudgetSeconds = 5.0;
constexpr double kConvergenceRelGap = 0.05;
constexpr double kConvergenceBudgetSeconds = 30.0;
constexpr int kConvergenceRounds = 50;
constexpr int kDriftLocalEpochs = 5;  // reported only
constexpr int kTamperTrials = 1000;
constexpr int kConservationRuns = 100;
constexpr int kTimingTriples = 1000;

struct Outcome {
    bool pass = false;
    std::string detail;
};

int g_failures = 0;

void criterion(int number, const std::string& title, const std::function<Outcome()>& body)
{
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass)
        ++g_failures;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", secs);
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << number << ": " << title << " [" << o.detail
              << "; " << buf << " s]" << std::endl;
}

double elapsed_since(std::chrono::steady_clock::time_point t)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

int run_cli(const std::string& args)
{
    const std::string cmd = std::string(FEDGRID_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

fs::path scratch(const std::string& name)
{
    const auto dir = fs::temp_directory_path() / ("fedgrid-acceptance-" + name);
    fs::remove_all(dir);
    return dir;
}

// Pooled mean squared error and gradient descent written independently of the library.
double pooled_mse(const std::vector<double>& w, const std::vector<ClientDataset>& data)
{
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& d : data) {
        for (std::size_t r = 0; r < d.rows(); ++r) {
            double yhat = w[0];
            for (std::size_t i = 0; i < d.feature_count; ++i)
                yhat += w[i + 1] * d.features[r * d.feature_count + i];
            sum += (yhat - d.targets[r]) * (yhat - d.targets[r]);
        }
        n += d.rows();
    }
    return sum / static_cast<double>(n);
}

std::vector<double> centralized_step(const std::vector<double>& w, const std::vector<ClientDataset>& data, double lr)
{
    std::vector<double> grad(w.size(), 0.0);
    std::size_t n = 0;
    for (const auto& d : data) {
        for (std::size_t r = 0; r < d.rows(); ++r) {
            double yhat = w[0];
            for (std::size_t i = 0; i < d.feature_count; ++i)
                yhat += w[i + 1] * d.features[r * d.feature_count + i];
            const double res = yhat - d.targets[r];
            grad[0] += 2.0 * res;
            for (std::size_t i = 0; i < d.feature_count; ++i)
                grad[i + 1] += 2.0 * res * d.features[r * d.feature_count + i];
        }
        n += d.rows();
    }
    auto out = w;
    for (std::size_t i = 0; i < w.size(); ++i)
        out[i] -= lr * grad[i] / static_cast<double>(n);
    return out;
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}); }

ClientDataset random_dataset(Rng& rng, std::size_t rows, std::size_t features)
{
    ClientDataset d;
    d.feature_count = features;
    std::vector<double> x(features);
    for (std::size_t r = 0; r < rows; ++r) {
        for (auto& v : x)
            v = rng.unit() * 4.0 - 2.0;
        d.add_row(x, rng.unit() * 6.0 - 3.0);
    }
    return d;
}

Outcome table4()
{
    const auto start = std::chrono::steady_clock::now();
    const auto report = bundled_potential_report();
    const std::int64_t expected_yearly_kwh[] = {687'180, 8'618'700, 6'325'740, 5'701'476, 15'855'432};
    bool ok = report.groups.size() == 5;
    for (std::size_t i = 0; ok && i < 5; ++i) {
        ok = report.groups[i].yearly == 12 * report.groups[i].monthly &&
             report.groups[i].yearly == expected_yearly_kwh[i] * 1000;
    }
    ok = ok && report.total.monthly == 3'099'044'000 && report.total.yearly == 37'188'528'000;
    ok = ok && check_potential_table().reproduced();
    const double secs = elapsed_since(start);
    return {ok && secs < kTable4BudgetSeconds,
            "totals " + format_kwh(report.total.monthly) + " / " + format_kwh(report.total.yearly) + " kWh"};
}

Outcome table6()
{
    const auto report = bundled_share_report();
    const double expected[] = {14, 13, 16, 3};
    bool ok = report.groups.size() == 4;
    std::string shares;
    for (std::size_t i = 0; ok && i < 4; ++i) {
        ok = report.groups[i].rounded_share == expected[i];
        shares += format_fixed(report.groups[i].rounded_share, 0) + "% ";
    }
    const std::string total = format_fixed(report.total.rounded_share, 1);
    ok = ok && total == "9.2";
    // The printed regional consumption gives the same one-decimal total.
    ok = ok && format_fixed(consumption_share(354'144, 3'867'502), 1) == "9.2";
    return {ok, "groups " + shares + "total " + total + "%"};
}

Outcome co2()
{
    // Exact product 3,867,502 * 69 / 100000 = 2668.57638 t.
    const double oracle = static_cast<double>(3'867'502LL * 69) / 1e5;
    const double got = co2_reduction(3'867'502.0, 6.9e-4);
    const auto report = co2_report(3'867'502.0);
    const std::string text = to_text(report);
    const bool ok = std::abs(got - oracle) <= kCo2Tolerance && format_fixed(got, 3) == "2668.576" &&
                    report.published_tonnes == 2'320.5012 &&
                    std::abs(report.published_implied_factor - 6.0e-4) < 1e-12 &&
                    text.find("2320.5012") != std::string::npos;
    return {ok, "reduction " + format_fixed(got, 6) + " t, published 2320.5012 t surfaced"};
}

Outcome one_step_oracle()
{
    const auto start = std::chrono::steady_clock::now();
    Rng rng(20240611);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t clients = 1 + rng.below(5);
        const std::size_t features = rng.below(4);
        std::vector<ClientDataset> data;
        for (std::size_t j = 0; j < clients; ++j)
            data.push_back(random_dataset(rng, 1 + rng.below(20), features));
        FedConfig cfg;
        cfg.total_clients = clients;
        cfg.participation_rate = 1.0;
        cfg.local_epochs = 1;
        cfg.rounds = 1;
        cfg.learning_rate = 0.05;
        Rng run_rng(static_cast<std::uint64_t>(trial));
        const auto fed = run_rounds(cfg, data, run_rng);
        const auto oracle = centralized_step(std::vector<double>(features + 1, 0.0), data, cfg.learning_rate);
        for (std::size_t i = 0; i < oracle.size(); ++i)
            worst = std::max(worst, rel_diff(fed.global.weights[i], oracle[i]));
    }
    const double secs = elapsed_since(start);
    char buf[64];
    std::snprintf(buf, sizeof buf, "max rel diff %.3g", worst);
    return {worst <= kOneStepRelTolerance && secs < kOneStepBudgetSeconds, buf};
}

Outcome convergence()
{
    const auto start = std::chrono::steady_clock::now();
    ScenarioConfig cfg = default_scenario_config();
    cfg.noise_amplitude = 0.0;
    const Scenario scenario = build_scenario(cfg);
    SimulationOptions options;
    options.train = false;
    const auto sim = run_simulation(scenario, options);
    const auto data =
        build_client_datasets(scenario, sim.readings, options.fed_clients, options.months, SeriesKind::Demand);

    // The simulation's own demand training settings, run for T rounds.
    FedConfig fed = options.demand_training;
    fed.total_clients = data.size();
    fed.rounds = kConvergenceRounds;
    const auto fed_mse = [&](const FedConfig& c) {
        Rng rng(1);
        return pooled_mse(run_rounds(c, data, rng).global.weights, data);
    };
    const auto central_mse = [&](int steps) {
        std::vector<double> w(kSeriesFeatureCount + 1, 0.0);
        for (int s = 0; s < steps; ++s)
            w = centralized_step(w, data, fed.learning_rate);
        return pooled_mse(w, data);
    };

    // Full participation with full-batch local epochs: each round advances the
    // global model by local_epochs gradient steps.
    const double fed_value = fed_mse(fed);
    const double central_value = central_mse(kConvergenceRounds * fed.local_epochs);
    const double gap = std::abs(fed_value - central_value) / central_value;

    FedConfig drift = fed;
    drift.local_epochs = kDriftLocalEpochs;
    const double drift_gap = std::abs(fed_mse(drift) - central_mse(kConvergenceRounds * kDriftLocalEpochs)) /
                             central_mse(kConvergenceRounds * kDriftLocalEpochs);

    const double secs = elapsed_since(start);
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "federated MSE %.6g, centralized MSE %.6g, gap %.4f%%; with %d local epochs the gap is %.1f%%",
                  fed_value, central_value, 100.0 * gap, kDriftLocalEpochs, 100.0 * drift_gap);
    return {gap <= kConvergenceRelGap && secs < kConvergenceBudgetSeconds, buf};
}

Outcome ledger_integrity()
{
    SimulationOptions options;
    options.months = 11;  // genesis + 11 monthly blocks
    options.train = false;
    const auto sim = run_simulation(build_scenario(default_scenario_config()), options);
    const std::vector<Block> chain(sim.ledger.blocks().begin(), sim.ledger.blocks().end());
    if (chain.size() != 12)
        return {false, "ledger has " + std::to_string(chain.size()) + " blocks"};

    Rng rng(606);
    int detected = 0;
    for (int trial = 0; trial < kTamperTrials; ++trial) {
        const auto i = static_cast<std::size_t>(rng.below(chain.size()));
        // Serialized form of one block: canonical bytes followed by the stored hash.
        auto bytes = canonical_bytes(chain[i]);
        bytes.insert(bytes.end(), chain[i].hash.begin(), chain[i].hash.end());
        const auto bit = rng.below(bytes.size() * 8);
        bytes[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));

        auto tampered = chain;
        try {
            const std::span<const std::uint8_t> all(bytes);
            Block b = block_from_canonical_bytes(all.first(all.size() - 32));
            std::copy(all.end() - 32, all.end(), b.hash.begin());
            tampered[i] = std::move(b);
        } catch (const ParseError&) {
            ++detected;  // the flip made the block unreadable
            continue;
        }
        const auto report = validate_chain(tampered);
        if (!report.valid && report.block_index && *report.block_index <= i)
            ++detected;
    }

    const auto dir = scratch("verify");
    bool codes_ok = run_cli("simulate --months 11 --out " + dir.string()) == 0;
    const auto ledger = dir / "ledger.jsonl";
    codes_ok = codes_ok && run_cli("verify " + ledger.string()) == kVerifyOk;
    auto text = slurp(ledger);
    const auto pos = text.find("\"timestamp\":3");
    if (pos != std::string::npos) {
        text[pos + 12] = '4';
        std::ofstream(ledger, std::ios::binary | std::ios::trunc) << text;
        codes_ok = codes_ok && run_cli("verify " + ledger.string()) == kVerifyTampered;
    } else {
        codes_ok = false;
    }
    std::ofstream(ledger, std::ios::binary | std::ios::trunc).close();
    codes_ok = codes_ok && run_cli("verify " + ledger.string()) == kVerifyUnreadable;
    fs::remove_all(dir);

    return {detected == kTamperTrials && codes_ok,
            std::to_string(detected) + "/" + std::to_string(kTamperTrials) + " flips detected, verify exit codes " +
                (codes_ok ? "0/1/2 as expected" : "WRONG")};
}

Outcome conservation()
{
    Rng rng(77);
    std::size_t months_checked = 0;
    std::size_t offers = 0, requests = 0;
    bool ok = true;
    for (int run = 0; run < kConservationRuns; ++run) {
        ScenarioConfig cfg = default_scenario_config();
        cfg.seed = rng.next();
        cfg.noise_amplitude = 0.3 * rng.unit();
        for (auto& g : cfg.groups) {
            g.house_count = 1 + static_cast<std::int64_t>(rng.below(40));
            // Consumption between half and one and a half times production.
            g.monthly_consumption_kwh = std::round(g.monthly_potential_kwh * (0.5 + rng.unit()));
        }
        SimulationOptions options;
        options.train = false;
        options.ticks_per_month = 1 + static_cast<int>(rng.below(3));
        const auto sim = run_simulation(build_scenario(cfg), options);

        for (const auto& block : sim.ledger.blocks())
            for (const auto& tx : block.transactions) {
                offers += tx.kind == TxKind::Offer;
                requests += tx.kind == TxKind::Request;
            }

        WattHours buffer = 0;
        for (int m = 1; m <= options.months; ++m) {
            PeriodFlows month{};
            month.buffer_before = buffer;
            for (const auto& t : sim.ticks) {
                if (t.month != m)
                    continue;
                ok = ok && t.flows.buffer_before == buffer &&
                     t.flows.sales == (t.flows.buffer_after - t.flows.buffer_before) + t.flows.purchases -
                                          t.flows.imports;
                month.sales += t.flows.sales;
                month.purchases += t.flows.purchases;
                month.imports += t.flows.imports;
                buffer = t.flows.buffer_after;
            }
            month.buffer_after = buffer;
            ok = ok && month.sales == (month.buffer_after - month.buffer_before) + month.purchases - month.imports;
            ++months_checked;
        }
    }
    ok = ok && offers > 0 && requests > 0;
    return {ok, std::to_string(months_checked) + " months over " + std::to_string(kConservationRuns) + " runs, " +
                    std::to_string(offers) + " offers / " + std::to_string(requests) + " requests"};
}

Outcome timing_formula()
{
    Rng rng(8080);
    int exact = 0;
    for (int i = 0; i < kTimingTriples; ++i) {
        const double lambda = rng.unit() * 10.0;
        const double tg = rng.unit() * 1e3;
        const double tl = rng.unit() * 1e3;
        const double expected = lambda * tg + tl;
        exact += global_round_time(lambda, tg, tl) == expected;
    }
    // The same formula must drive the per-round trace.
    Rng data_rng(1);
    std::vector<ClientDataset> data{random_dataset(data_rng, 5, 1), random_dataset(data_rng, 5, 1)};
    FedConfig cfg;
    cfg.total_clients = 2;
    cfg.rounds = 3;
    cfg.round_delay = 2.5;
    cfg.server_seconds = 4.0;
    cfg.local_seconds = 0.75;
    Rng run_rng(2);
    const auto result = run_rounds(cfg, data, run_rng);
    bool trace_ok = result.timings.size() == 3;
    for (const auto& t : result.timings)
        trace_ok = trace_ok && t.global_seconds == 2.5 * 4.0 + 0.75;
    return {exact == kTimingTriples && trace_ok,
            std::to_string(exact) + "/" + std::to_string(kTimingTriples) + " exact, trace " + (trace_ok ? "ok" : "WRONG")};
}

Outcome determinism()
{
    const auto a = scratch("det-a");
    const auto b = scratch("det-b");
    if (run_cli("simulate --seed 42 --out " + a.string()) != 0 || run_cli("simulate --seed 42 --out " + b.string()) != 0)
        return {false, "simulate failed"};
    std::size_t files = 0;
    bool ok = true;
    for (const auto& entry : fs::directory_iterator(a)) {
        ++files;
        ok = ok && slurp(entry.path()) == slurp(b / entry.path().filename());
    }
    ok = ok && fs::exists(a / "ledger.jsonl") && fs::exists(a / "report.json") && fs::exists(a / "report.txt");
    fs::remove_all(a);
    fs::remove_all(b);
    return {ok, std::to_string(files) + " files byte-identical"};
}

} // namespace

int main()
{
    criterion(1, "yearly potential table reproduction", table4);
    criterion(2, "consumption share table reproduction", table6);
    criterion(3, "CO2 reduction at 6.9e-4 t/kWh", co2);
    criterion(4, "one federated round equals one pooled gradient step", one_step_oracle);
    criterion(5, "federated demand model converges like centralized GD", convergence);
    criterion(6, "ledger tamper detection", ledger_integrity);
    criterion(7, "energy conservation per simulated month", conservation);
    criterion(8, "round timing formula", timing_formula);
    criterion(9, "byte-identical reruns", determinism);
    std::cout << (g_failures == 0 ? "all criteria passed" : std::to_string(g_failures) + " criteria failed")
              << std::endl;
    return g_failures == 0 ? 0 : 1;
}
