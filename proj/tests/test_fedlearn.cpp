#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "fedgrid/errors.hpp"
#include "fedgrid/fedlearn.hpp"

using namespace fedgrid;

namespace {

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

ModelState random_model(Rng& rng, std::size_t dim)
{
    ModelState m{std::vector<double>(dim), 0};
    for (auto& w : m.weights)
        w = rng.unit() * 2.0 - 1.0;
    return m;
}

// Loss written out independently of the library's linear_response.
double loss_oracle(const std::vector<double>& w, const ClientDataset& d)
{
    double sum = 0.0;
    for (std::size_t r = 0; r < d.rows(); ++r) {
        double yhat = w[0];
        for (std::size_t i = 0; i < d.feature_count; ++i)
            yhat += w[i + 1] * d.features[r * d.feature_count + i];
        sum += (yhat - d.targets[r]) * (yhat - d.targets[r]);
    }
    return sum / static_cast<double>(d.rows());
}

// Centralized full-batch step on the pooled data.
std::vector<double> pooled_step_oracle(const std::vector<double>& w, const std::vector<ClientDataset>& clients,
                                       double lr)
{
    std::vector<double> grad(w.size(), 0.0);
    std::size_t n = 0;
    for (const auto& d : clients) {
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
    std::vector<double> out = w;
    for (std::size_t i = 0; i < w.size(); ++i)
        out[i] -= lr * grad[i] / static_cast<double>(n);
    return out;
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}); }

FedConfig one_step_config(std::size_t clients)
{
    FedConfig cfg;
    cfg.total_clients = clients;
    cfg.participation_rate = 1.0;
    cfg.rounds = 1;
    cfg.local_epochs = 1;
    cfg.batch_size = 1u << 20;
    cfg.learning_rate = 0.05;
    return cfg;
}

} // namespace

TEST_CASE("client_update hand-gradient example")
{
    // Loss (w*x - y)^2 at w = 0, x = 1, y = 2 has gradient -4 for both the
    // coefficient and the bias; one step of 0.1 lands both at 0.4.
    ClientDataset d;
    d.add_row(std::vector<double>{1.0}, 2.0);
    FedConfig cfg;
    cfg.learning_rate = 0.1;
    const ModelState start{{0.0, 0.0}, 0};
    const auto out = client_update(start, d, cfg);
    CHECK(out.weights[1] == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(out.weights[0] == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(out.sample_count == 1);
    CHECK(start.weights == std::vector<double>{0.0, 0.0});
}

TEST_CASE("analytic gradient matches central finite differences")
{
    Rng rng(2024);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t features = 1 + rng.below(3);
        const auto d = random_dataset(rng, 1 + rng.below(20), features);
        const auto m = random_model(rng, features + 1);
        const auto grad = squared_error_gradient(m.weights, d, 0, d.rows());
        for (std::size_t i = 0; i < grad.size(); ++i) {
            const double h = 1e-5;
            auto up = m.weights;
            auto down = m.weights;
            up[i] += h;
            down[i] -= h;
            const double fd = (loss_oracle(up, d) - loss_oracle(down, d)) / (2 * h);
            CHECK(rel_diff(grad[i], fd) < 1e-6);
        }
    }
}

TEST_CASE("client_update edge cases")
{
    FedConfig cfg;
    SUBCASE("vanishing learning rate leaves weights unchanged")
    {
        Rng rng(3);
        const auto d = random_dataset(rng, 10, 2);
        const ModelState start{{0.3, -0.2, 0.7}, 0};
        cfg.learning_rate = 1e-300;
        const auto out = client_update(start, d, cfg);
        CHECK(out.weights == start.weights);
    }
    SUBCASE("zero residual is a fixed point for any number of epochs")
    {
        ClientDataset d;
        for (int x = -3; x <= 3; ++x)
            d.add_row(std::vector<double>{static_cast<double>(x)}, 2.0 + 3.0 * x);
        cfg.local_epochs = 7;
        cfg.batch_size = 2;
        const ModelState start{{2.0, 3.0}, 0};
        CHECK(client_update(start, d, cfg).weights == start.weights);
    }
    SUBCASE("empty dataset is rejected")
    {
        ClientDataset d;
        d.feature_count = 1;
        CHECK_THROWS_AS(client_update(ModelState{{0.0, 0.0}, 0}, d, cfg), DatasetError);
    }
    SUBCASE("dimension mismatch is rejected")
    {
        ClientDataset d;
        d.add_row(std::vector<double>{1.0, 2.0}, 1.0);
        CHECK_THROWS_AS(client_update(ModelState{{0.0, 0.0}, 0}, d, cfg), DatasetError);
    }
    SUBCASE("ragged last batch")
    {
        // 5 rows in batches of 2: three steps per epoch. Compare with the manual sequence.
        Rng rng(9);
        const auto d = random_dataset(rng, 5, 1);
        cfg.batch_size = 2;
        cfg.learning_rate = 0.01;
        ModelState manual{{0.0, 0.0}, 0};
        for (std::size_t first : {0u, 2u, 4u}) {
            const auto g = squared_error_gradient(manual.weights, d, first, std::min<std::size_t>(2, 5 - first));
            for (std::size_t i = 0; i < g.size(); ++i)
                manual.weights[i] -= cfg.learning_rate * g[i];
        }
        CHECK(client_update(ModelState{{0.0, 0.0}, 0}, d, cfg).weights == manual.weights);
    }
}

TEST_CASE("select_clients")
{
    Rng rng(1);
    CHECK(select_clients(10, 0.0, rng).size() == 1);
    const auto all = select_clients(10, 1.0, rng);
    CHECK(all.size() == 10);
    CHECK(std::is_sorted(all.begin(), all.end()));
    CHECK(select_clients(4, 0.5, rng).size() == 2);
    CHECK(select_clients(7, 0.3, rng).size() == 3);

    Rng a(5), b(5);
    for (int i = 0; i < 20; ++i)
        CHECK(select_clients(9, 0.4, a) == select_clients(9, 0.4, b));

    // Each of 5 clients should be picked about 2/5 of the time.
    Rng r(77);
    std::vector<int> hits(5, 0);
    const int trials = 20000;
    for (int i = 0; i < trials; ++i)
        for (auto j : select_clients(5, 0.4, r))
            ++hits[j];
    for (int h : hits)
        CHECK(std::abs(h / double(trials) - 0.4) < 0.02);
}

TEST_CASE("aggregate")
{
    const ModelState u{{1.5, -2.0, 0.25}, 7};
    SUBCASE("single update is returned unchanged")
    {
        const std::vector<ModelState> one{u};
        const auto out = aggregate(one);
        CHECK(out.weights == u.weights);
        CHECK(out.sample_count == 7);
    }
    SUBCASE("sample-weighted mean")
    {
        const std::vector<ModelState> two{{{0.0}, 1}, {{4.0}, 3}};
        CHECK(aggregate(two).weights[0] == doctest::Approx(3.0));
        CHECK(aggregate(two).sample_count == 4);
    }
    SUBCASE("equal counts give the arithmetic mean")
    {
        const std::vector<ModelState> ups{{{1.0, 10.0}, 5}, {{2.0, 20.0}, 5}, {{6.0, 0.0}, 5}};
        CHECK(aggregate(ups).weights[0] == doctest::Approx(3.0));
        CHECK(aggregate(ups).weights[1] == doctest::Approx(10.0));
    }
    SUBCASE("errors")
    {
        CHECK_THROWS_AS(aggregate(std::vector<ModelState>{}), AggregationError);
        CHECK_THROWS_AS(aggregate(std::vector<ModelState>{{{1.0}, 0}, {{2.0}, 0}}), AggregationError);
        CHECK_THROWS_AS(aggregate(std::vector<ModelState>{{{1.0}, 1}, {{2.0, 3.0}, 1}}), AggregationError);
    }
    SUBCASE("permutation, idempotence and count scaling")
    {
        Rng rng(31);
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<ModelState> ups;
            const std::size_t k = 1 + rng.below(6);
            for (std::size_t j = 0; j < k; ++j) {
                auto m = random_model(rng, 3);
                m.sample_count = 1 + static_cast<std::int64_t>(rng.below(50));
                ups.push_back(m);
            }
            const auto base = aggregate(ups);

            auto shuffled = ups;
            std::reverse(shuffled.begin(), shuffled.end());
            std::rotate(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(rng.below(k)), shuffled.end());
            auto scaled = ups;
            const auto factor = 1 + static_cast<std::int64_t>(rng.below(9));
            for (auto& m : scaled)
                m.sample_count *= factor;
            const std::vector<ModelState> same(k, ups.front());

            const auto p = aggregate(shuffled);
            const auto s = aggregate(scaled);
            const auto i = aggregate(same);
            for (std::size_t d = 0; d < 3; ++d) {
                CHECK(rel_diff(p.weights[d], base.weights[d]) < 1e-14);
                CHECK(rel_diff(s.weights[d], base.weights[d]) < 1e-14);
                CHECK(rel_diff(i.weights[d], ups.front().weights[d]) < 1e-14);
            }
        }
    }
}

TEST_CASE("one federated round equals one pooled gradient step")
{
    Rng rng(4242);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t clients = 1 + rng.below(5);
        const std::size_t features = rng.below(4);  // F = features + 1 <= 4
        std::vector<ClientDataset> data;
        for (std::size_t j = 0; j < clients; ++j)
            data.push_back(random_dataset(rng, 1 + rng.below(20), features));

        Rng run_rng(trial);
        const auto result = run_rounds(one_step_config(clients), data, run_rng);
        const auto oracle = pooled_step_oracle(std::vector<double>(features + 1, 0.0), data, 0.05);
        for (std::size_t i = 0; i < oracle.size(); ++i)
            CHECK(rel_diff(result.global.weights[i], oracle[i]) < 1e-9);
    }
}

TEST_CASE("run_rounds")
{
    Rng rng(8);
    std::vector<ClientDataset> data;
    for (int j = 0; j < 4; ++j)
        data.push_back(random_dataset(rng, 15, 2));
    FedConfig cfg = one_step_config(4);
    cfg.rounds = 12;
    cfg.participation_rate = 0.5;
    cfg.local_epochs = 2;
    cfg.batch_size = 4;

    SUBCASE("bit-reproducible under a fixed seed")
    {
        Rng a(99), b(99);
        const auto r1 = run_rounds(cfg, data, a);
        const auto r2 = run_rounds(cfg, data, b);
        CHECK(r1.global.weights == r2.global.weights);
        REQUIRE(r1.trace.size() == r2.trace.size());
        for (std::size_t t = 0; t < r1.trace.size(); ++t) {
            CHECK(r1.trace[t].selected_clients == r2.trace[t].selected_clients);
            CHECK(r1.trace[t].global_loss == r2.trace[t].global_loss);
        }
    }
    SUBCASE("the server only ever receives model states")
    {
        std::vector<std::pair<int, std::size_t>> uploads;
        std::vector<ModelState> received;
        Rng a(3);
        const auto result = run_rounds(cfg, data, a, [&](int round, std::size_t client, const ModelState& m) {
            uploads.emplace_back(round, client);
            received.push_back(m);
        });
        CHECK(uploads.size() == static_cast<std::size_t>(cfg.rounds) * 2);
        for (std::size_t k = 0; k < received.size(); ++k) {
            CHECK(received[k].dimension() == 3);
            CHECK(received[k].sample_count == static_cast<std::int64_t>(data[uploads[k].second].rows()));
        }
        for (std::size_t t = 0; t < result.trace.size(); ++t)
            CHECK(result.trace[t].selected_clients.size() == 2);
    }
    SUBCASE("training starts from zero weights")
    {
        cfg.rounds = 1;
        cfg.learning_rate = 1e-300;
        Rng a(1);
        const auto result = run_rounds(cfg, data, a);
        for (double w : result.global.weights)
            CHECK(std::abs(w) < 1e-290);
    }
    SUBCASE("timing trace")
    {
        cfg.round_delay = 2.0;
        cfg.server_seconds = 5.0;
        cfg.local_seconds = 3.0;
        Rng a(1);
        const auto result = run_rounds(cfg, data, a);
        REQUIRE(result.timings.size() == 12);
        CHECK(result.timings.front().global_seconds == 13.0);
        CHECK(result.trace.back().round == 12);
    }
    SUBCASE("invalid configurations")
    {
        Rng a(1);
        cfg.rounds = 0;
        CHECK_THROWS_AS(run_rounds(cfg, data, a), ValidationError);
        cfg.rounds = 1;
        cfg.total_clients = 3;
        CHECK_THROWS_AS(run_rounds(cfg, data, a), DatasetError);
    }
    SUBCASE("divergence aborts instead of returning NaN")
    {
        cfg.learning_rate = 1e6;
        cfg.rounds = 50;
        Rng a(1);
        CHECK_THROWS_AS(run_rounds(cfg, data, a), NonFiniteWeightsError);
    }
}

TEST_CASE("global_round_time")
{
    CHECK(global_round_time(2, 5, 3) == 13.0);
    CHECK(global_round_time(0, 8.5, 1.25) == 1.25);
    CHECK(global_round_time(1, 4.5, 0) == 4.5);
}

TEST_CASE("predict")
{
    const std::vector<double> x{0.3, -1.0, 2.0};
    CHECK(predict(ModelState{{0.0, 0.0, 0.0, 0.0}, 0}, x) == 0.0);
    CHECK(predict(ModelState{{2.5, 0.0, 0.0, 0.0}, 0}, x) == 2.5);
    CHECK(predict(ModelState{{-1.0, 0.0, 0.0, 0.0}, 0}, x) == 0.0);
    CHECK_THROWS_AS(predict(ModelState{{0.0, 0.0}, 0}, x), DatasetError);
}

TEST_CASE("trained model recovers y = 3x")
{
    ClientDataset d;
    for (int i = 0; i <= 8; ++i) {
        const double x = 0.25 * i;
        d.add_row(std::vector<double>{x}, 3.0 * x);
    }
    // Closed-form least squares via the 2x2 normal equations.
    double sx = 0, sxx = 0, sy = 0, sxy = 0;
    const double n = static_cast<double>(d.rows());
    for (std::size_t r = 0; r < d.rows(); ++r) {
        const double x = d.features[r], y = d.targets[r];
        sx += x;
        sxx += x * x;
        sy += y;
        sxy += x * y;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / n;

    FedConfig cfg;
    cfg.learning_rate = 0.2;
    cfg.local_epochs = 5000;
    const auto model = client_update(ModelState{{0.0, 0.0}, 0}, d, cfg);
    CHECK(model.weights[1] == doctest::Approx(slope).epsilon(1e-9));
    CHECK(model.weights[0] == doctest::Approx(intercept).epsilon(1e-9).scale(1.0));
    CHECK(std::abs(predict(model, std::vector<double>{2.0}) - 6.0) < 1e-6);
}

TEST_CASE("series features")
{
    ClientDataset d;
    const std::vector<double> months{200.0, 220.0, 250.0};
    append_series(d, months, 190.0);
    REQUIRE(d.rows() == 3);
    CHECK(d.feature_count == kSeriesFeatureCount);
    CHECK(d.row(0)[2] == doctest::Approx(0.19));
    CHECK(d.row(1)[2] == doctest::Approx(0.2));
    CHECK(d.targets[2] == doctest::Approx(0.25));
    // month 3: sin(pi/2) = 1
    CHECK(d.row(2)[0] == doctest::Approx(1.0));
}
