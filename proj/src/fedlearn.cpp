#include "fedgrid/fedlearn.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>
#include <numeric>

#include "fedgrid/errors.hpp"
#include "fedgrid/grid_model.hpp"

namespace fedgrid {

bool ModelState::finite() const noexcept
{
    return std::all_of(weights.begin(), weights.end(), [](double w) { return std::isfinite(w); });
}

void validate(const FedConfig& cfg)
{
    auto require = [](bool ok, const char* field, const char* what) {
        if (!ok)
            throw ValidationError(field, what);
    };
    require(cfg.total_clients >= 1, "total_clients", "must be >= 1");
    require(cfg.participation_rate >= 0.0 && cfg.participation_rate <= 1.0, "participation_rate",
            "must lie in [0, 1]");
    require(cfg.rounds >= 1, "rounds", "must be >= 1");
    require(cfg.local_epochs >= 1, "local_epochs", "must be >= 1");
    require(cfg.batch_size >= 1, "batch_size", "must be >= 1");
    require(std::isfinite(cfg.learning_rate) && cfg.learning_rate > 0.0, "learning_rate", "must be > 0");
    require(std::isfinite(cfg.round_delay) && cfg.round_delay >= 0.0, "round_delay", "must be >= 0");
    require(std::isfinite(cfg.server_seconds) && cfg.server_seconds >= 0.0, "server_seconds", "must be >= 0");
    require(std::isfinite(cfg.local_seconds) && cfg.local_seconds >= 0.0, "local_seconds", "must be >= 0");
}

void ClientDataset::add_row(std::span<const double> x, double y)
{
    if (rows() == 0 && features.empty() && feature_count == 0)
        feature_count = x.size();
    if (x.size() != feature_count)
        throw DatasetError("row has " + std::to_string(x.size()) + " features, dataset expects " +
                           std::to_string(feature_count));
    features.insert(features.end(), x.begin(), x.end());
    targets.push_back(y);
}

double linear_response(std::span<const double> weights, std::span<const double> features)
{
    double acc = weights[0];
    for (std::size_t i = 0; i < features.size(); ++i)
        acc += weights[i + 1] * features[i];
    return acc;
}

double mean_squared_error(const ModelState& model, const ClientDataset& data)
{
    if (data.rows() == 0)
        return 0.0;
    double sum = 0.0;
    for (std::size_t r = 0; r < data.rows(); ++r) {
        const double residual = linear_response(model.weights, data.row(r)) - data.targets[r];
        sum += residual * residual;
    }
    return sum / static_cast<double>(data.rows());
}

double pooled_mean_squared_error(const ModelState& model, std::span<const ClientDataset> datasets)
{
    double sum = 0.0;
    std::size_t rows = 0;
    for (const auto& d : datasets) {
        sum += mean_squared_error(model, d) * static_cast<double>(d.rows());
        rows += d.rows();
    }
    return rows == 0 ? 0.0 : sum / static_cast<double>(rows);
}

std::vector<double> squared_error_gradient(std::span<const double> weights, const ClientDataset& data,
                                           std::size_t first_row, std::size_t row_count)
{
    std::vector<double> grad(weights.size(), 0.0);
    for (std::size_t r = first_row; r < first_row + row_count; ++r) {
        const auto x = data.row(r);
        const double residual = linear_response(weights, x) - data.targets[r];
        grad[0] += residual;
        for (std::size_t i = 0; i < x.size(); ++i)
            grad[i + 1] += residual * x[i];
    }
    const double scale = 2.0 / static_cast<double>(row_count);
    for (auto& g : grad)
        g *= scale;
    return grad;
}

ModelState client_update(const ModelState& start, const ClientDataset& data, const FedConfig& cfg)
{
    if (data.rows() == 0)
        throw DatasetError("client dataset is empty");
    if (start.dimension() != data.feature_count + 1)
        throw DatasetError("model dimension " + std::to_string(start.dimension()) + " does not match dataset (" +
                           std::to_string(data.feature_count + 1) + ")");

    ModelState local{start.weights, static_cast<std::int64_t>(data.rows())};
    for (int epoch = 0; epoch < cfg.local_epochs; ++epoch) {
        // Contiguous batches of at most batch_size rows; the last one may be short.
        for (std::size_t first = 0; first < data.rows(); first += cfg.batch_size) {
            const std::size_t count = std::min(cfg.batch_size, data.rows() - first);
            const auto grad = squared_error_gradient(local.weights, data, first, count);
            for (std::size_t i = 0; i < grad.size(); ++i)
                local.weights[i] -= cfg.learning_rate * grad[i];
        }
    }
    return local;
}

std::vector<std::size_t> select_clients(std::size_t total_clients, double participation_rate, Rng& rng)
{
    const auto wanted = static_cast<std::size_t>(std::ceil(participation_rate * static_cast<double>(total_clients)));
    const std::size_t m = std::min(std::max<std::size_t>(wanted, 1), total_clients);

    // Partial Fisher-Yates over the client ids.
    std::vector<std::size_t> pool(total_clients);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(total_clients - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(m);
    std::sort(pool.begin(), pool.end());
    return pool;
}

ModelState aggregate(std::span<const ModelState> updates)
{
    if (updates.empty())
        throw AggregationError("no client updates to aggregate");
    const std::size_t dim = updates.front().dimension();
    std::int64_t total = 0;
    for (const auto& u : updates) {
        if (u.dimension() != dim)
            throw AggregationError("client updates have mismatched dimensions");
        if (u.sample_count < 0)
            throw AggregationError("negative sample count");
        total += u.sample_count;
    }
    if (total == 0)
        throw AggregationError("total sample count is zero");

    ModelState out{std::vector<double>(dim, 0.0), total};
    for (const auto& u : updates) {
        const double share = static_cast<double>(u.sample_count) / static_cast<double>(total);
        for (std::size_t i = 0; i < dim; ++i)
            out.weights[i] += share * u.weights[i];
    }
    return out;
}

FedRunResult run_rounds(const FedConfig& cfg, std::span<const ClientDataset> datasets, Rng& rng,
                        const UploadObserver& observer)
{
    validate(cfg);
    if (datasets.size() != cfg.total_clients)
        throw DatasetError("expected " + std::to_string(cfg.total_clients) + " client datasets, got " +
                           std::to_string(datasets.size()));
    const std::size_t feature_count = datasets.front().feature_count;
    for (std::size_t j = 0; j < datasets.size(); ++j) {
        if (datasets[j].rows() == 0)
            throw DatasetError("client " + std::to_string(j) + " has no data");
        if (datasets[j].feature_count != feature_count)
            throw DatasetError("client " + std::to_string(j) + " has a different feature count");
    }

    FedRunResult result;
    result.global = ModelState{std::vector<double>(feature_count + 1, 0.0), 0};

    for (int t = 1; t <= cfg.rounds; ++t) {
        const auto selected = select_clients(cfg.total_clients, cfg.participation_rate, rng);

        // Clients train independently from the broadcast model.
        std::vector<std::future<ModelState>> pending;
        pending.reserve(selected.size());
        const ModelState broadcast = result.global;
        for (const std::size_t j : selected) {
            pending.push_back(std::async(selected.size() > 1 ? std::launch::async : std::launch::deferred,
                                         [&, j] { return client_update(broadcast, datasets[j], cfg); }));
        }

        std::vector<ModelState> uploads;
        uploads.reserve(selected.size());
        for (std::size_t k = 0; k < selected.size(); ++k) {
            uploads.push_back(pending[k].get());
            if (!uploads.back().finite())
                throw NonFiniteWeightsError("round " + std::to_string(t) + ": client " + std::to_string(selected[k]) +
                                            " produced non-finite weights (learning rate too large?)");
            if (observer)
                observer(t, selected[k], uploads.back());
        }

        result.global = aggregate(uploads);
        if (!result.global.finite())
            throw NonFiniteWeightsError("round " + std::to_string(t) + ": aggregated weights are non-finite");

        const double t_global = global_round_time(cfg.round_delay, cfg.server_seconds, cfg.local_seconds);
        result.timings.push_back({cfg.local_seconds, cfg.server_seconds, cfg.round_delay, t_global});
        result.trace.push_back({t, selected, pooled_mean_squared_error(result.global, datasets), t_global});
    }
    return result;
}

double global_round_time(double round_delay, double server_seconds, double local_seconds)
{
    return round_delay * server_seconds + local_seconds;
}

double predict(const ModelState& model, std::span<const double> features)
{
    if (model.dimension() != features.size() + 1)
        throw DatasetError("model expects " + std::to_string(model.dimension() - 1) + " features, got " +
                           std::to_string(features.size()));
    return std::max(0.0, linear_response(model.weights, features));
}

std::array<double, kSeriesFeatureCount> series_features(int calendar_month_index, double previous_kwh)
{
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(calendar_month_index) / 12.0;
    return {std::sin(angle), std::cos(angle), previous_kwh / kEnergyScaleKwh};
}

void append_series(ClientDataset& data, std::span<const double> months_kwh, double baseline_kwh)
{
    double previous = baseline_kwh;
    for (std::size_t i = 0; i < months_kwh.size(); ++i) {
        const auto x = series_features(calendar_month(static_cast<int>(i) + 1), previous);
        data.add_row(x, months_kwh[i] / kEnergyScaleKwh);
        previous = months_kwh[i];
    }
}

} // namespace fedgrid
