#include "fedgrid/chain.hpp"

#include <algorithm>
#include <set>

#include <openssl/evp.h>

#include "fedgrid/errors.hpp"

namespace fedgrid {

namespace {

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v)
{
    for (int shift = 56; shift >= 0; shift -= 8)
        out.push_back(static_cast<std::uint8_t>(v >> shift));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v)
{
    for (int shift = 24; shift >= 0; shift -= 8)
        out.push_back(static_cast<std::uint8_t>(v >> shift));
}

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::uint64_t u64() { return take(8); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(take(4)); }
    std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)); }

    Digest digest()
    {
        need(32);
        Digest d;
        std::copy_n(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_), 32, d.begin());
        pos_ += 32;
        return d;
    }

    bool done() const noexcept { return pos_ == bytes_.size(); }

private:
    void need(std::size_t n) const
    {
        if (bytes_.size() - pos_ < n)
            throw ParseError("canonical block truncated");
    }

    std::uint64_t take(std::size_t n)
    {
        need(n);
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < n; ++i)
            v = (v << 8) | bytes_[pos_ + i];
        pos_ += n;
        return v;
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

constexpr std::uint64_t kTickShift = 48;
constexpr std::uint64_t kHouseMask = (std::uint64_t{1} << 40) - 1;

} // namespace

std::uint64_t make_tx_id(std::uint64_t tick, HouseId house, TxFlow flow) noexcept
{
    return (tick << kTickShift) | ((house & kHouseMask) << 8) | static_cast<std::uint8_t>(flow);
}

TxFlow flow_of(std::uint64_t tx_id) noexcept { return static_cast<TxFlow>(tx_id & 0xff); }

std::vector<std::uint8_t> canonical_bytes(const Block& block)
{
    std::vector<std::uint8_t> out;
    out.reserve(8 + 32 + 8 + 4 + block.transactions.size() * 42);
    put_u64(out, block.index);
    out.insert(out.end(), block.prev_hash.begin(), block.prev_hash.end());
    put_u64(out, block.timestamp);
    put_u32(out, static_cast<std::uint32_t>(block.transactions.size()));
    for (const auto& tx : block.transactions) {
        put_u64(out, tx.tx_id);
        out.push_back(static_cast<std::uint8_t>(tx.kind));
        put_u64(out, tx.actor);
        put_u64(out, tx.counterparty);
        put_u64(out, static_cast<std::uint64_t>(tx.amount));
        put_u64(out, static_cast<std::uint64_t>(tx.unit_price));
        out.push_back(tx.period);
    }
    return out;
}

Block block_from_canonical_bytes(std::span<const std::uint8_t> bytes)
{
    Reader in(bytes);
    Block block;
    block.index = in.u64();
    block.prev_hash = in.digest();
    block.timestamp = in.u64();
    const std::uint32_t count = in.u32();
    if (count > bytes.size() / 42)
        throw ParseError("canonical block declares more transactions than it holds");
    block.transactions.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        EnergyTransaction tx;
        tx.tx_id = in.u64();
        const std::uint8_t kind = in.u8();
        if (kind > static_cast<std::uint8_t>(TxKind::Settlement))
            throw ParseError("unknown transaction kind " + std::to_string(kind));
        tx.kind = static_cast<TxKind>(kind);
        tx.actor = in.u64();
        tx.counterparty = in.u64();
        tx.amount = static_cast<WattHours>(in.u64());
        tx.unit_price = static_cast<PriceMilli>(in.u64());
        tx.period = in.u8();
        block.transactions.push_back(tx);
    }
    if (!in.done())
        throw ParseError("trailing bytes after canonical block");
    return block;
}

Digest sha256(std::span<const std::uint8_t> bytes)
{
    Digest out{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 || len != out.size())
        throw LedgerError("SHA-256 computation failed");
    return out;
}

Digest compute_hash(const Block& block) { return sha256(canonical_bytes(block)); }

std::string to_hex(const Digest& digest)
{
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(64);
    for (const auto b : digest) {
        out.push_back(kHex[b >> 4]);
        out.push_back(kHex[b & 0xf]);
    }
    return out;
}

Digest digest_from_hex(const std::string& hex)
{
    if (hex.size() != 64)
        throw ParseError("digest must be 64 hex characters");
    auto nibble = [](char c) -> std::uint8_t {
        if (c >= '0' && c <= '9')
            return static_cast<std::uint8_t>(c - '0');
        if (c >= 'a' && c <= 'f')
            return static_cast<std::uint8_t>(c - 'a' + 10);
        if (c >= 'A' && c <= 'F')
            return static_cast<std::uint8_t>(c - 'A' + 10);
        throw ParseError(std::string("invalid hex character '") + c + "'");
    };
    Digest d;
    for (std::size_t i = 0; i < 32; ++i)
        d[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
    return d;
}

Block genesis()
{
    Block block;
    block.hash = compute_hash(block);
    return block;
}

ChainReport validate_chain(std::span<const Block> chain)
{
    auto fail = [](std::size_t i, std::string why) { return ChainReport{false, i, std::move(why)}; };

    if (chain.empty())
        return ChainReport{false, std::nullopt, "chain is empty"};

    const Block& first = chain.front();
    if (first.index != 0)
        return fail(0, "genesis index is not 0");
    if (first.prev_hash != Digest{})
        return fail(0, "genesis prev_hash is not zero");
    if (!first.transactions.empty())
        return fail(0, "genesis carries transactions");

    for (std::size_t i = 0; i < chain.size(); ++i) {
        const Block& b = chain[i];
        if (b.index != i)
            return fail(i, "block index " + std::to_string(b.index) + " at position " + std::to_string(i));
        if (compute_hash(b) != b.hash)
            return fail(i, "stored hash does not match block contents");
        if (i > 0 && b.prev_hash != chain[i - 1].hash)
            return fail(i, "prev_hash does not link to block " + std::to_string(i - 1));
    }
    return {};
}

std::vector<Block> append_block(std::vector<Block> chain, std::vector<EnergyTransaction> transactions,
                                std::uint64_t timestamp)
{
    const auto report = validate_chain(chain);
    if (!report)
        throw LedgerError("refusing to append to an invalid chain: " + report.reason);

    Block block;
    block.index = chain.back().index + 1;
    block.prev_hash = chain.back().hash;
    block.timestamp = timestamp;
    block.transactions = std::move(transactions);
    block.hash = compute_hash(block);
    chain.push_back(std::move(block));
    return chain;
}

Ledger::Ledger() : blocks_{genesis()} {}

Ledger::Ledger(std::vector<Block> chain) : blocks_(std::move(chain))
{
    const auto report = validate_chain(blocks_);
    if (!report)
        throw LedgerError("cannot adopt invalid chain: " + report.reason);
}

const Block& Ledger::append(std::vector<EnergyTransaction> transactions, std::uint64_t timestamp)
{
    // Blocks here are immutable once committed, so only the head needs rechecking.
    const Block& prev = blocks_.back();
    if (compute_hash(prev) != prev.hash)
        throw LedgerError("head block fails its hash check");

    Block block;
    block.index = prev.index + 1;
    block.prev_hash = prev.hash;
    block.timestamp = timestamp;
    block.transactions = std::move(transactions);
    block.hash = compute_hash(block);
    blocks_.push_back(std::move(block));
    return blocks_.back();
}

MicroCurrency GridAccount::balance(HouseId actor) const
{
    const auto it = cash.find(actor);
    return it == cash.end() ? 0 : it->second;
}

EnergyTransaction announce_surplus(const MeterReading& reading, PriceMilli price, std::uint64_t tick)
{
    if (classify_role(reading) != Role::Prosumer)
        throw ContractViolation("house " + std::to_string(reading.house_id) + " period " +
                                std::to_string(reading.period) + " is " + to_string(classify_role(reading)) +
                                "; only prosumers may offer surplus");
    return {make_tx_id(tick, reading.house_id, TxFlow::Offer),
            TxKind::Offer,
            reading.house_id,
            kGrid,
            reading.produced - reading.consumed,
            price,
            static_cast<std::uint8_t>(reading.period)};
}

EnergyTransaction place_demand(const MeterReading& reading, PriceMilli price, std::uint64_t tick)
{
    if (classify_role(reading) != Role::Consumer)
        throw ContractViolation("house " + std::to_string(reading.house_id) + " period " +
                                std::to_string(reading.period) + " is " + to_string(classify_role(reading)) +
                                "; only consumers may request energy");
    return {make_tx_id(tick, reading.house_id, TxFlow::Request),
            TxKind::Request,
            reading.house_id,
            kGrid,
            reading.consumed - reading.produced,
            price,
            static_cast<std::uint8_t>(reading.period)};
}

SettlementResult settle(std::span<const EnergyTransaction> offers, std::span<const EnergyTransaction> requests,
                        const GridAccount& grid, const SmartContract& contract)
{
    std::set<std::uint64_t> ids;
    auto sorted = [&ids](std::span<const EnergyTransaction> txs, TxKind expected) {
        std::vector<EnergyTransaction> out(txs.begin(), txs.end());
        for (const auto& tx : out) {
            if (!ids.insert(tx.tx_id).second)
                throw LedgerError("duplicate tx_id " + std::to_string(tx.tx_id));
            if (tx.kind != expected)
                throw ContractViolation("tx " + std::to_string(tx.tx_id) + " has the wrong kind for settlement");
            if (tx.amount <= 0)
                throw ContractViolation("tx " + std::to_string(tx.tx_id) + " has a non-positive amount");
        }
        std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.tx_id < b.tx_id; });
        return out;
    };
    const auto ordered_offers = sorted(offers, TxKind::Offer);
    const auto ordered_requests = sorted(requests, TxKind::Request);

    SettlementResult result;
    result.grid = grid;
    result.flows.buffer_before = grid.energy_buffer;
    const PriceMilli price = contract.unit_price;

    auto settlement = [&](const EnergyTransaction& source, TxFlow flow, HouseId actor, HouseId counterparty,
                          WattHours amount) {
        const std::uint64_t tick = source.tx_id >> kTickShift;
        result.settlements.push_back({make_tx_id(tick, source.actor, flow), TxKind::Settlement, actor, counterparty,
                                      amount, price, source.period});
        const MicroCurrency cash = amount * price;
        result.grid.cash[actor] += cash;
        result.grid.cash[counterparty] -= cash;
    };

    for (const auto& offer : ordered_offers) {
        settlement(offer, TxFlow::SaleToGrid, offer.actor, kGrid, offer.amount);
        result.grid.energy_buffer += offer.amount;
        result.flows.sales += offer.amount;
    }
    // A consumer pays the grid: actor is GRID (seller), counterparty the consumer.
    for (const auto& request : ordered_requests) {
        const WattHours from_buffer = std::min(request.amount, result.grid.energy_buffer);
        const WattHours imported = request.amount - from_buffer;
        if (from_buffer > 0)
            settlement(request, TxFlow::SupplyFromBuffer, kGrid, request.actor, from_buffer);
        if (imported > 0)
            settlement(request, TxFlow::SupplyFromImport, kGrid, request.actor, imported);
        result.grid.energy_buffer -= from_buffer;
        result.flows.purchases += request.amount;
        result.flows.imports += imported;
    }
    result.flows.buffer_after = result.grid.energy_buffer;
    return result;
}

std::optional<std::string> check_role_consistency(std::span<const EnergyTransaction> transactions,
                                                  std::span<const MeterReading> readings)
{
    std::map<std::pair<HouseId, std::uint8_t>, const MeterReading*> by_key;
    for (const auto& r : readings)
        by_key.emplace(std::pair{r.house_id, static_cast<std::uint8_t>(r.period)}, &r);

    for (const auto& tx : transactions) {
        if (tx.kind == TxKind::Settlement)
            continue;
        const auto found = by_key.find({tx.actor, tx.period});
        if (found == by_key.end())
            return "tx " + std::to_string(tx.tx_id) + ": no reading for house " + std::to_string(tx.actor);
        const MeterReading& r = *found->second;
        const Role role = classify_role(r);
        if (tx.kind == TxKind::Offer && (role != Role::Prosumer || tx.amount != r.produced - r.consumed))
            return "tx " + std::to_string(tx.tx_id) + ": offer does not match a prosumer reading";
        if (tx.kind == TxKind::Request && (role != Role::Consumer || tx.amount != r.consumed - r.produced))
            return "tx " + std::to_string(tx.tx_id) + ": request does not match a consumer reading";
    }
    return std::nullopt;
}

std::optional<SurplusAlert> surplus_alert(int period, WattHours produced, WattHours consumed)
{
    if (produced > consumed)
        return SurplusAlert{period, produced - consumed};
    return std::nullopt;
}

} // namespace fedgrid
