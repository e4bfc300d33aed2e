// SPDX-License-Identifier: Apache-2.0

#include "cfmimo/config.hpp"

#include "text_io.hpp"

#include <fmt/format.h>

#include <array>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace cfmimo {
namespace {

template <class E>
struct EnumName {
    E value;
    std::string_view name;
};

constexpr std::array<EnumName<TopologySource>, 2> topology_names{{
    {TopologySource::ppp, "ppp"},
    {TopologySource::file, "file"},
}};
constexpr std::array<EnumName<MobilitySource>, 2> mobility_names{{
    {MobilitySource::rwp, "rwp"},
    {MobilitySource::file, "file"},
}};
constexpr std::array<EnumName<ChannelProvider>, 2> provider_names{{
    {ChannelProvider::log_distance, "log-distance"},
    {ChannelProvider::map, "map"},
}};
constexpr std::array<EnumName<MobilityBoundary>, 2> boundary_names{{
    {MobilityBoundary::resample, "resample"},
    {MobilityBoundary::reflect, "reflect"},
}};
constexpr std::array<EnumName<DistanceUnit>, 2> unit_names{{
    {DistanceUnit::kilometres, "km"},
    {DistanceUnit::metres, "m"},
}};
constexpr std::array<EnumName<SlotMode>, 2> slot_names{{
    {SlotMode::worst, "worst"},
    {SlotMode::average, "average"},
}};
constexpr std::array<EnumName<EstimatorForm>, 2> estimator_names{{
    {EstimatorForm::conventional, "conventional"},
    {EstimatorForm::as_printed, "as-printed"},
}};

template <class E, std::size_t N>
std::string enum_to_string(const std::array<EnumName<E>, N>& table, E v)
{
    for (const auto& e : table)
        if (e.value == v)
            return std::string(e.name);
    throw InvalidState("unnamed enum value");
}

template <class E, std::size_t N>
E enum_from_string(const std::array<EnumName<E>, N>& table, std::string_view s)
{
    for (const auto& e : table)
        if (e.name == s)
            return e.value;
    std::string allowed;
    for (const auto& e : table)
        allowed += (allowed.empty() ? "" : ", ") + std::string(e.name);
    throw ConfigError(fmt::format("'{}' is not one of: {}", s, allowed));
}

std::string format_value(double v) { return fmt::format("{}", v); }
std::string format_value(int v) { return fmt::format("{}", v); }
std::string format_value(std::uint64_t v) { return fmt::format("{}", v); }
std::string format_value(bool v) { return v ? "true" : "false"; }
std::string format_value(const std::string& v) { return v; }

void parse_value(std::string_view s, double& out)
{
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, out);
    if (s.empty() || ec != std::errc() || ptr != end || !std::isfinite(out))
        throw ConfigError(fmt::format("malformed number '{}'", s));
}

template <class I>
void parse_integer(std::string_view s, I& out)
{
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, out);
    if (s.empty() || ec != std::errc() || ptr != end)
        throw ConfigError(fmt::format("malformed integer '{}'", s));
}

void parse_value(std::string_view s, int& out) { parse_integer(s, out); }
void parse_value(std::string_view s, std::uint64_t& out) { parse_integer(s, out); }

void parse_value(std::string_view s, bool& out)
{
    if (s == "true")
        out = true;
    else if (s == "false")
        out = false;
    else
        throw ConfigError(fmt::format("expected true or false, got '{}'", s));
}

void parse_value(std::string_view s, std::string& out) { out = std::string(s); }

struct Field {
    std::string key;
    std::function<std::string(const ExperimentConfig&)> get;
    std::function<void(ExperimentConfig&, std::string_view)> set;
    bool affects_results = true;
};

template <class Access>
Field plain(std::string key, Access acc, bool affects_results = true)
{
    return {std::move(key),
            [acc](const ExperimentConfig& c) { return format_value(acc(c)); },
            [acc](ExperimentConfig& c, std::string_view s) { parse_value(s, acc(c)); },
            affects_results};
}

template <class Access, class Table>
Field named(std::string key, Access acc, const Table& table)
{
    return {std::move(key),
            [acc, &table](const ExperimentConfig& c) { return enum_to_string(table, acc(c)); },
            [acc, &table](ExperimentConfig& c, std::string_view s) { acc(c) = enum_from_string(table, s); },
            true};
}

#define CFG(expr) [](auto& c) -> auto& { return c.expr; }

const std::vector<Field>& fields()
{
    static const std::vector<Field> table = [] {
        std::vector<Field> f;
        f.push_back(plain("seed", CFG(seed)));
        f.push_back(plain("blocks", CFG(blocks)));
        f.push_back(plain("workers", CFG(workers), false));
        f.push_back(plain("output_dir", CFG(output_dir), false));

        f.push_back(named("topology.source", CFG(topology_source), topology_names));
        f.push_back(plain("topology.file", CFG(topology_file)));
        f.push_back(plain("topology.ap_count", CFG(ap_count)));
        f.push_back(plain("topology.width", CFG(area.width)));
        f.push_back(plain("topology.height", CFG(area.height)));
        f.push_back(plain("topology.clusters_per_side", CFG(clusters_per_side)));

        f.push_back(named("mobility.source", CFG(mobility_source), mobility_names));
        f.push_back(plain("mobility.file", CFG(tracks_file)));
        f.push_back(plain("mobility.ue_count", CFG(ue_count)));
        f.push_back(plain("mobility.speed", CFG(speed)));
        f.push_back(plain("mobility.mean_transition", CFG(mean_transition)));
        f.push_back(named("mobility.boundary", CFG(boundary), boundary_names));

        f.push_back(named("channel.provider", CFG(channel_provider), provider_names));
        f.push_back(plain("channel.map_file", CFG(pathloss_map_file)));
        f.push_back(plain("channel.shadowing", CFG(shadowing)));
        f.push_back(plain("channel.sequential_pilots", CFG(sequential_pilots)));
        f.push_back(plain("channel.carrier_freq", CFG(radio.carrier_freq)));
        f.push_back(plain("channel.bandwidth", CFG(radio.bandwidth)));
        f.push_back(plain("channel.noise_figure", CFG(radio.noise_figure)));
        f.push_back(plain("channel.slot_duration", CFG(radio.slot_duration)));
        f.push_back(plain("channel.block_len_slots", CFG(radio.block_len_slots)));
        // one key drives both the channel pilot length and the AP load cap
        f.push_back({"channel.pilot_len_slots",
                     [](const ExperimentConfig& c) { return format_value(c.radio.pilot_len_slots); },
                     [](ExperimentConfig& c, std::string_view s) {
                         parse_value(s, c.radio.pilot_len_slots);
                         c.constraints.tau_p = c.radio.pilot_len_slots;
                     },
                     true});
        f.push_back(plain("channel.tx_power", CFG(radio.tx_power_per_link)));
        f.push_back(plain("channel.ap_height", CFG(radio.ap_height)));
        f.push_back(plain("channel.ue_height", CFG(radio.ue_height)));
        f.push_back(plain("channel.shadowing_sigma", CFG(radio.shadowing_sigma)));
        f.push_back(plain("channel.d0", CFG(radio.d0)));
        f.push_back(plain("channel.dc", CFG(radio.dc)));
        f.push_back(plain("channel.near_field_clamp", CFG(radio.near_field_clamp)));
        f.push_back(plain("channel.outage_dbm", CFG(radio.outage_dbm)));
        f.push_back(named("channel.distance_unit", CFG(radio.distance_unit), unit_names));

        f.push_back({"selection.algorithm",
                     [](const ExperimentConfig& c) { return std::string(to_string(c.algorithm)); },
                     [](ExperimentConfig& c, std::string_view s) {
                         const auto a = parse_algorithm(s);
                         if (!a)
                             throw ConfigError(fmt::format("unknown algorithm '{}'", s));
                         c.algorithm = *a;
                     },
                     true});
        f.push_back(plain("selection.g_max", CFG(constraints.g_max)));
        f.push_back(plain("selection.delta", CFG(constraints.delta)));
        f.push_back(plain("selection.e_best", CFG(constraints.e_best)));
        f.push_back(plain("selection.beta0", CFG(constraints.beta0)));
        f.push_back(plain("selection.allow_tau_p_equality", CFG(constraints.allow_tau_p_equality)));
        f.push_back(plain("selection.one_based_threshold", CFG(constraints.one_based_threshold)));

        f.push_back(plain("mdp.round_budget", CFG(mdp.round_budget)));
        f.push_back(plain("mdp.w1", CFG(mdp.w1)));
        f.push_back(plain("mdp.w2", CFG(mdp.w2)));
        f.push_back(plain("mdp.w3", CFG(mdp.w3)));

        f.push_back(plain("evaluation.n_mc", CFG(evaluation.n_mc)));
        f.push_back(named("evaluation.slot_mode", CFG(evaluation.slot_mode), slot_names));
        f.push_back(plain("evaluation.slot_stride", CFG(evaluation.slot_stride)));
        f.push_back(named("evaluation.estimator", CFG(evaluation.estimator), estimator_names));
        return f;
    }();
    return table;
}

#undef CFG

const std::set<std::string_view> path_keys{"topology.file", "mobility.file", "channel.map_file"};

void require_file(const std::string& path, std::string_view key)
{
    if (path.empty())
        throw ConfigError(fmt::format("{} is required", key));
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec))
        throw ConfigError(fmt::format("{}: file '{}' does not exist", key, path));
}

}  // namespace

void ExperimentConfig::validate() const
{
    if (blocks < 1)
        throw ConfigError("blocks must be at least 1");
    if (workers < 0)
        throw ConfigError("workers must be non-negative");
    if (!(area.width > 0) || !(area.height > 0))
        throw ConfigError("topology area must be positive");
    if (clusters_per_side < 0)
        throw ConfigError("topology.clusters_per_side must be non-negative");
    if (topology_source == TopologySource::ppp && ap_count < 1)
        throw ConfigError("topology.ap_count must be at least 1");
    if (topology_source == TopologySource::file)
        require_file(topology_file, "topology.file");
    if (mobility_source == MobilitySource::rwp) {
        if (ue_count < 1)
            throw ConfigError("mobility.ue_count must be at least 1");
        if (!(speed > 0))
            throw ConfigError("mobility.speed must be positive");
        if (!(mean_transition > 0))
            throw ConfigError("mobility.mean_transition must be positive");
    } else {
        require_file(tracks_file, "mobility.file");
    }
    if (channel_provider == ChannelProvider::map)
        require_file(pathloss_map_file, "channel.map_file");
    if (algorithm == Algorithm::cuc && clusters_per_side < 1)
        throw ConfigError("cuc needs topology.clusters_per_side >= 1");
    if (constraints.tau_p != radio.pilot_len_slots)
        throw ConfigError("selection tau_p must equal channel.pilot_len_slots");
    if (evaluation.n_mc < 1)
        throw ConfigError("evaluation.n_mc must be at least 1");
    if (evaluation.slot_stride < 1)
        throw ConfigError("evaluation.slot_stride must be at least 1");
    if (mdp.round_budget < 1)
        throw ConfigError("mdp.round_budget must be at least 1");
    try {
        radio.validate();
        const int m = topology_source == TopologySource::ppp ? ap_count : std::numeric_limits<int>::max();
        constraints.validate(m);
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
}

ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir)
{
    ExperimentConfig cfg;
    std::map<std::string_view, const Field*> by_key;
    for (const auto& f : fields())
        by_key.emplace(f.key, &f);
    std::set<std::string> seen;

    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto nl = text.find('\n', start);
        const auto raw = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
        start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (detail::is_blank_or_comment(raw))
            continue;
        const auto eq = raw.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(fmt::format("line {}: expected key = value", line_no));
        const auto key = detail::trim(raw.substr(0, eq));
        const auto value = detail::trim(raw.substr(eq + 1));
        const auto it = by_key.find(key);
        if (it == by_key.end())
            throw ConfigError(fmt::format("line {}: unknown key '{}'", line_no, key));
        if (!seen.insert(std::string(key)).second)
            throw ConfigError(fmt::format("line {}: duplicate key '{}'", line_no, key));
        try {
            if (path_keys.count(key) && !value.empty() && !base_dir.empty() &&
                std::filesystem::path(value).is_relative())
                it->second->set(cfg, (base_dir / std::filesystem::path(value)).lexically_normal().string());
            else
                it->second->set(cfg, value);
        } catch (const ConfigError& e) {
            throw ConfigError(fmt::format("line {}: {}: {}", line_no, key, e.what()));
        }
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError(fmt::format("cannot open config '{}'", path.string()));
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return parse_config(buf.str(), path.parent_path());
    } catch (const ConfigError& e) {
        throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
    }
}

std::string serialize_config(const ExperimentConfig& cfg)
{
    std::string out;
    for (const auto& f : fields())
        out += fmt::format("{} = {}\n", f.key, f.get(cfg));
    return out;
}

std::uint64_t config_hash(const ExperimentConfig& cfg)
{
    std::uint64_t h = 1469598103934665603ULL;
    for (const auto& f : fields()) {
        if (!f.affects_results)
            continue;
        for (const char ch : fmt::format("{} = {}\n", f.key, f.get(cfg))) {
            h ^= static_cast<unsigned char>(ch);
            h *= 1099511628211ULL;
        }
    }
    return h;
}

}  // namespace cfmimo
