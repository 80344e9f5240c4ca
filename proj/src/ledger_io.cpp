#include <sstream>

#include "fedgrid/chain.hpp"
#include "fedgrid/errors.hpp"
#include "json.hpp"

namespace fedgrid {

namespace {

const char* kind_name(TxKind kind)
{
    switch (kind) {
    case TxKind::Offer: return "offer";
    case TxKind::Request: return "request";
    case TxKind::Settlement: return "settlement";
    }
    return "?";
}

TxKind kind_from_name(const std::string& name)
{
    if (name == "offer")
        return TxKind::Offer;
    if (name == "request")
        return TxKind::Request;
    if (name == "settlement")
        return TxKind::Settlement;
    throw ParseError("unknown transaction kind '" + name + "'");
}

nlohmann::json block_to_json(const Block& b)
{
    nlohmann::json txs = nlohmann::json::array();
    for (const auto& tx : b.transactions) {
        txs.push_back({{"tx_id", tx.tx_id},
                       {"kind", kind_name(tx.kind)},
                       {"actor", tx.actor},
                       {"counterparty", tx.counterparty},
                       {"amount_wh", tx.amount},
                       {"price_milli", tx.unit_price},
                       {"period", tx.period}});
    }
    return {{"index", b.index},
            {"prev_hash", to_hex(b.prev_hash)},
            {"timestamp", b.timestamp},
            {"transactions", txs},
            {"hash", to_hex(b.hash)}};
}

template <typename T>
T get_field(const nlohmann::json& obj, const char* key)
{
    if (!obj.is_object() || !obj.contains(key))
        throw ParseError(std::string("missing field '") + key + "'");
    try {
        return obj.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ParseError(std::string("field '") + key + "' has the wrong type");
    }
}

Block block_from_json(const nlohmann::json& j)
{
    Block b;
    b.index = get_field<std::uint64_t>(j, "index");
    b.prev_hash = digest_from_hex(get_field<std::string>(j, "prev_hash"));
    b.timestamp = get_field<std::uint64_t>(j, "timestamp");
    b.hash = digest_from_hex(get_field<std::string>(j, "hash"));
    const auto txs = get_field<nlohmann::json>(j, "transactions");
    if (!txs.is_array())
        throw ParseError("'transactions' must be an array");
    for (const auto& t : txs) {
        EnergyTransaction tx;
        tx.tx_id = get_field<std::uint64_t>(t, "tx_id");
        tx.kind = kind_from_name(get_field<std::string>(t, "kind"));
        tx.actor = get_field<std::uint64_t>(t, "actor");
        tx.counterparty = get_field<std::uint64_t>(t, "counterparty");
        tx.amount = get_field<std::int64_t>(t, "amount_wh");
        tx.unit_price = get_field<std::int64_t>(t, "price_milli");
        const auto period = get_field<std::uint64_t>(t, "period");
        if (period > 255)
            throw ParseError("period out of range");
        tx.period = static_cast<std::uint8_t>(period);
        b.transactions.push_back(tx);
    }
    return b;
}

} // namespace

std::string ledger_to_jsonl(std::span<const Block> chain)
{
    std::string out;
    for (const auto& b : chain) {
        out += block_to_json(b).dump();
        out += '\n';
    }
    return out;
}

std::vector<Block> ledger_from_jsonl(const std::string& text)
{
    std::vector<Block> chain;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r")
            continue;
        try {
            chain.push_back(block_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
        } catch (const ParseError& e) {
            throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (chain.empty())
        throw ParseError("ledger file contains no blocks");
    return chain;
}

} // namespace fedgrid
