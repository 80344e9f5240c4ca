#pragma once

// Append-only hash-chained ledger and the smart-contract engine that turns
// meter readings into offers, requests and grid-mediated settlements.
//
// Canonical block layout (all integers big-endian):
//   u64 index | 32B prev_hash | u64 timestamp | u32 tx_count |
//   tx_count x (u64 tx_id | u8 kind | u64 actor | u64 counterparty |
//               u64 amount_wh | u64 price_milli | u8 period)
// The block hash is SHA-256 over exactly these bytes.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fedgrid/grid_model.hpp"

namespace fedgrid {

using Digest = std::array<std::uint8_t, 32>;

inline constexpr HouseId kGrid = 0;

enum class TxKind : std::uint8_t { Offer = 0, Request = 1, Settlement = 2 };

// Low byte of a tx_id. Settlements carry their flow so imports stay visible in
// the ledger without widening the wire format.
enum class TxFlow : std::uint8_t {
    Offer = 0,
    Request = 1,
    SaleToGrid = 2,      // prosumer -> GRID
    SupplyFromBuffer = 3,  // GRID -> consumer, covered by buffered surplus
    SupplyFromImport = 4,  // GRID -> consumer, covered by external import
};

// tx_id = tick << 48 | house << 8 | flow. Unique per (tick, house, flow).
std::uint64_t make_tx_id(std::uint64_t tick, HouseId house, TxFlow flow) noexcept;
TxFlow flow_of(std::uint64_t tx_id) noexcept;

struct EnergyTransaction {
    std::uint64_t tx_id = 0;
    TxKind kind = TxKind::Offer;
    HouseId actor = kGrid;
    HouseId counterparty = kGrid;
    WattHours amount = 0;
    PriceMilli unit_price = 0;
    std::uint8_t period = 0;

    friend bool operator==(const EnergyTransaction&, const EnergyTransaction&) = default;
};

struct Block {
    std::uint64_t index = 0;
    Digest prev_hash{};
    std::uint64_t timestamp = 0;
    std::vector<EnergyTransaction> transactions;
    Digest hash{};

    friend bool operator==(const Block&, const Block&) = default;
};

std::vector<std::uint8_t> canonical_bytes(const Block& block);
// Inverse of canonical_bytes; the returned block's hash field is left zeroed.
Block block_from_canonical_bytes(std::span<const std::uint8_t> bytes);
Digest sha256(std::span<const std::uint8_t> bytes);
Digest compute_hash(const Block& block);

std::string to_hex(const Digest& digest);
Digest digest_from_hex(const std::string& hex);

Block genesis();

struct ChainReport {
    bool valid = true;
    std::optional<std::size_t> block_index;  // first offending block
    std::string reason;

    explicit operator bool() const noexcept { return valid; }
};

ChainReport validate_chain(std::span<const Block> chain);

// Returns chain extended by one block. Refuses (LedgerError) if chain is not valid.
std::vector<Block> append_block(std::vector<Block> chain, std::vector<EnergyTransaction> transactions,
                                std::uint64_t timestamp);

// Single-writer ledger. Committed blocks are only reachable through const access.
class Ledger {
public:
    Ledger();
    // Adopts an existing chain after validating it.
    explicit Ledger(std::vector<Block> chain);

    const Block& append(std::vector<EnergyTransaction> transactions, std::uint64_t timestamp);

    std::span<const Block> blocks() const noexcept { return blocks_; }
    const Block& head() const noexcept { return blocks_.back(); }
    std::size_t size() const noexcept { return blocks_.size(); }

private:
    std::vector<Block> blocks_;
};

// ---------------------------------------------------------------------------
// Smart contract

struct SmartContract {
    PriceMilli unit_price = 0;
};

struct GridAccount {
    WattHours energy_buffer = 0;
    // Net cash per actor (positive = received). GRID is keyed as kGrid.
    std::map<HouseId, MicroCurrency> cash;

    MicroCurrency balance(HouseId actor) const;
};

EnergyTransaction announce_surplus(const MeterReading& reading, PriceMilli price, std::uint64_t tick);
EnergyTransaction place_demand(const MeterReading& reading, PriceMilli price, std::uint64_t tick);

struct PeriodFlows {
    WattHours sales = 0;      // prosumer -> grid
    WattHours purchases = 0;  // grid -> consumer, buffer and import combined
    WattHours imports = 0;
    WattHours buffer_before = 0;
    WattHours buffer_after = 0;
};

struct SettlementResult {
    std::vector<EnergyTransaction> settlements;
    GridAccount grid;
    PeriodFlows flows;
};

// Every offer is bought by GRID; every request is served by GRID, first from
// the energy buffer (prior surplus plus this period's sales), then by import.
// Processing order is ascending tx_id. Pure in its arguments.
SettlementResult settle(std::span<const EnergyTransaction> offers, std::span<const EnergyTransaction> requests,
                        const GridAccount& grid, const SmartContract& contract);

// Offers must come from readings with produced > consumed, requests from the
// reverse, with amounts equal to the imbalance. Returns the first violation.
std::optional<std::string> check_role_consistency(std::span<const EnergyTransaction> transactions,
                                                  std::span<const MeterReading> readings);

struct SurplusAlert {
    int period = 0;
    WattHours surplus = 0;
};

std::optional<SurplusAlert> surplus_alert(int period, WattHours produced, WattHours consumed);

// Ledger export: one JSON object per line, hashes hex-encoded.
std::string ledger_to_jsonl(std::span<const Block> chain);
std::vector<Block> ledger_from_jsonl(const std::string& text);

} // namespace fedgrid
