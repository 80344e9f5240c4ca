#pragma once

// Federated averaging over household client groups.
//
// The server starts from zero weights. Each round it samples a fraction of
// the client pool and replaces the global model with the sample-weighted mean
// of the models those clients return. Clients run mini-batch
// gradient descent on a squared-error linear model; only ModelState values
// ever travel from a client to the server.

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "fedgrid/rng.hpp"

namespace fedgrid {

// Weight vector (index 0 is the bias) plus the number of samples behind it.
struct ModelState {
    std::vector<double> weights;
    std::int64_t sample_count = 0;

    std::size_t dimension() const noexcept { return weights.size(); }
    bool finite() const noexcept;
};

struct FedConfig {
    std::size_t total_clients = 4;      // J
    double participation_rate = 1.0;    // M
    int rounds = 50;                    // T
    int local_epochs = 1;               // epsilon
    std::size_t batch_size = 1u << 20;  // beta; larger than any client means full batch
    double learning_rate = 0.5;
    double round_delay = 1.0;           // communication delay multiplier
    double server_seconds = 1.0;        // T_g
    double local_seconds = 1.0;         // T_local
};

void validate(const FedConfig& cfg);

// Row-major feature matrix without the bias column, and one target per row.
struct ClientDataset {
    std::size_t feature_count = 0;
    std::vector<double> features;
    std::vector<double> targets;

    std::size_t rows() const noexcept { return targets.size(); }
    std::span<const double> row(std::size_t i) const { return {features.data() + i * feature_count, feature_count}; }
    void add_row(std::span<const double> x, double y);
};

struct RoundTiming {
    double local_seconds = 0.0;
    double server_seconds = 0.0;
    double round_delay = 0.0;
    double global_seconds = 0.0;
};

struct RoundTrace {
    int round = 0;
    std::vector<std::size_t> selected_clients;
    double global_loss = 0.0;
    double global_seconds = 0.0;
};

struct FedRunResult {
    ModelState global;
    std::vector<RoundTiming> timings;
    std::vector<RoundTrace> trace;
};

// Invoked for every message a client sends to the server.
using UploadObserver = std::function<void(int round, std::size_t client, const ModelState& upload)>;

// Raw linear response w0 + sum_i w_i x_i.
double linear_response(std::span<const double> weights, std::span<const double> features);

// Mean squared error of the model over a dataset.
double mean_squared_error(const ModelState& model, const ClientDataset& data);
double pooled_mean_squared_error(const ModelState& model, std::span<const ClientDataset> datasets);

// Gradient of the batch mean squared error with respect to the weights.
std::vector<double> squared_error_gradient(std::span<const double> weights, const ClientDataset& data,
                                           std::size_t first_row, std::size_t row_count);

ModelState client_update(const ModelState& start, const ClientDataset& data, const FedConfig& cfg);

// Uniform random subset of size max(ceil(M*J), 1), returned in ascending order.
std::vector<std::size_t> select_clients(std::size_t total_clients, double participation_rate, Rng& rng);

ModelState aggregate(std::span<const ModelState> updates);

FedRunResult run_rounds(const FedConfig& cfg, std::span<const ClientDataset> datasets, Rng& rng,
                        const UploadObserver& observer = {});

double global_round_time(double round_delay, double server_seconds, double local_seconds);

// Model output clamped at zero; throws DatasetError on dimension mismatch.
double predict(const ModelState& model, std::span<const double> features);

// ---------------------------------------------------------------------------
// Feature encoding for monthly energy series.
//
// Each row is (sin(2*pi*m/12), cos(2*pi*m/12), previous month / scale) and the
// target is this month / scale. Scaling to MWh keeps gradient descent well
// conditioned at household magnitudes.

inline constexpr double kEnergyScaleKwh = 1000.0;
inline constexpr std::size_t kSeriesFeatureCount = 3;

std::array<double, kSeriesFeatureCount> series_features(int calendar_month, double previous_kwh);

// Appends rows for one house: months[i] is the kWh value for simulated month
// i+1; the first row uses `baseline_kwh` as its lag.
void append_series(ClientDataset& data, std::span<const double> months_kwh, double baseline_kwh);

} // namespace fedgrid
