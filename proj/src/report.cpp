#include "feddct/report.hpp"

#include "feddct/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>

namespace feddct {

std::string format_double(double v)
{
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc())
        throw IoError("cannot format number");
    return std::string(buf, end);
}

namespace {

std::vector<std::string_view> split(std::string_view s, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return out;
}

template <typename T>
T parse_number(std::string_view field)
{
    T v{};
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size())
        throw IoError("malformed trace field '" + std::string(field) + "'");
    return v;
}

} // namespace

TraceRow to_row(const RoundReport& r)
{
    TraceRow row;
    row.round = r.round;
    row.virtual_time_s = r.virtual_time_s;
    row.strategy = r.strategy;
    row.selected_tier = r.selected_tier;
    row.num_selected = static_cast<int>(r.participants.size());
    row.num_completed = static_cast<int>(r.completed.size());
    row.num_timed_out = static_cast<int>(r.timed_out.size());
    row.accuracy = r.accuracy;
    row.round_duration_s = r.duration_s;
    row.dmax_per_tier = r.dmax_per_tier;
    return row;
}

std::string format_row(const TraceRow& r)
{
    std::string s;
    s += std::to_string(r.round);
    s += ',';
    s += format_double(r.virtual_time_s);
    s += ',';
    s += to_string(r.strategy);
    s += ',';
    s += std::to_string(r.selected_tier);
    s += ',';
    s += std::to_string(r.num_selected);
    s += ',';
    s += std::to_string(r.num_completed);
    s += ',';
    s += std::to_string(r.num_timed_out);
    s += ',';
    s += format_double(r.accuracy);
    s += ',';
    s += format_double(r.round_duration_s);
    s += ',';
    for (std::size_t i = 0; i < r.dmax_per_tier.size(); ++i) {
        if (i)
            s += ';';
        s += format_double(r.dmax_per_tier[i]);
    }
    return s;
}

TraceRow parse_row(std::string_view line)
{
    if (!line.empty() && line.back() == '\r')
        line.remove_suffix(1);
    auto f = split(line, ',');
    if (f.size() != 10)
        throw IoError("trace row has " + std::to_string(f.size()) + " fields, expected 10");
    TraceRow r;
    r.round = parse_number<int>(f[0]);
    r.virtual_time_s = parse_number<double>(f[1]);
    auto s = parse_strategy(f[2]);
    if (!s)
        throw IoError("unknown strategy '" + std::string(f[2]) + "' in trace");
    r.strategy = *s;
    r.selected_tier = parse_number<int>(f[3]);
    r.num_selected = parse_number<int>(f[4]);
    r.num_completed = parse_number<int>(f[5]);
    r.num_timed_out = parse_number<int>(f[6]);
    r.accuracy = parse_number<double>(f[7]);
    r.round_duration_s = parse_number<double>(f[8]);
    if (!f[9].empty())
        for (auto part : split(f[9], ';'))
            r.dmax_per_tier.push_back(parse_number<double>(part));
    return r;
}

void write_trace_csv(std::ostream& out, std::span<const RoundReport> reports)
{
    out << kTraceHeader << '\n';
    for (const auto& r : reports)
        out << format_row(to_row(r)) << '\n';
}

std::vector<TraceRow> read_trace_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line) || std::string_view(line).substr(0, kTraceHeader.size()) != kTraceHeader)
        throw IoError("missing trace header");
    std::vector<TraceRow> rows;
    while (std::getline(in, line))
        if (!line.empty())
            rows.push_back(parse_row(line));
    return rows;
}

std::vector<double> smooth(std::span<const double> values, int window)
{
    std::vector<double> out;
    if (values.empty())
        return out;
    const auto w = static_cast<std::size_t>(std::max(window, 1));
    if (values.size() < w) {
        double sum = 0.0;
        for (double v : values)
            sum += v;
        out.push_back(sum / static_cast<double>(values.size()));
        return out;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        sum += values[i];
        if (i >= w)
            sum -= values[i - w];
        if (i + 1 >= w)
            out.push_back(sum / static_cast<double>(w));
    }
    return out;
}

std::optional<double> time_to_target(std::span<const TraceRow> rows, double target)
{
    int run = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        run = rows[i].accuracy >= target ? run + 1 : 0;
        if (run == kTargetConsecutiveReports)
            return rows[i + 1 - kTargetConsecutiveReports].virtual_time_s;
    }
    return std::nullopt;
}

RunSummary summarize(std::span<const TraceRow> rows, double target, int window, std::string digest)
{
    RunSummary s;
    s.config_digest = std::move(digest);
    s.rounds = static_cast<int>(rows.size());
    if (rows.empty())
        return s;
    s.strategy = rows.front().strategy;
    std::vector<double> acc;
    acc.reserve(rows.size());
    for (const auto& r : rows) {
        acc.push_back(r.accuracy);
        s.total_stragglers += r.num_timed_out;
    }
    const auto sm = smooth(acc, window);
    s.best_accuracy = *std::max_element(sm.begin(), sm.end());
    s.time_to_target_s = time_to_target(rows, target);
    return s;
}

nlohmann::json to_json(const RunSummary& s)
{
    nlohmann::json j;
    j["strategy"] = std::string(to_string(s.strategy));
    j["best_accuracy"] = s.best_accuracy;
    if (s.time_to_target_s)
        j["time_to_target_s"] = *s.time_to_target_s;
    else
        j["time_to_target_s"] = nullptr;
    j["rounds"] = s.rounds;
    j["total_stragglers"] = s.total_stragglers;
    j["config_digest"] = s.config_digest;
    return j;
}

double median(std::vector<double> v)
{
    if (v.empty())
        return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<CompareRow> compare_summaries(std::span<const RunSummary> runs)
{
    std::vector<Strategy> order;
    std::map<Strategy, std::vector<const RunSummary*>> groups;
    for (const auto& r : runs) {
        if (!groups.contains(r.strategy))
            order.push_back(r.strategy);
        groups[r.strategy].push_back(&r);
    }

    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<CompareRow> rows;
    for (Strategy s : order) {
        CompareRow row;
        row.strategy = s;
        std::vector<double> acc;
        std::vector<double> time;
        for (const auto* r : groups[s]) {
            acc.push_back(r->best_accuracy);
            time.push_back(r->time_to_target_s.value_or(inf));
        }
        row.runs = static_cast<int>(acc.size());
        row.best_accuracy = median(acc);
        const double t = median(time);
        if (std::isfinite(t))
            row.time_to_target_s = t;
        rows.push_back(row);
    }

    for (auto& row : rows) {
        double best_acc = -inf;
        double best_time = inf;
        bool others = false;
        for (const auto& o : rows) {
            if (o.strategy == row.strategy)
                continue;
            others = true;
            best_acc = std::max(best_acc, o.best_accuracy);
            best_time = std::min(best_time, o.time_to_target_s.value_or(inf));
        }
        if (!others) {
            best_acc = row.best_accuracy;
            best_time = row.time_to_target_s.value_or(inf);
        }
        row.impr_a_pct = best_acc > 0.0 ? (row.best_accuracy - best_acc) / best_acc * 100.0 : 0.0;
        if (row.time_to_target_s && std::isfinite(best_time) && best_time > 0.0)
            row.impr_b_pct = (best_time - *row.time_to_target_s) / best_time * 100.0;
    }
    return rows;
}

void check_compatible(std::span<const SimConfig> configs)
{
    if (configs.empty())
        return;
    auto strip = [](const SimConfig& c) {
        auto j = to_json(c);
        j.erase("strategy");
        j.erase("seed");
        return j;
    };
    const auto ref = strip(configs.front());
    for (std::size_t i = 1; i < configs.size(); ++i) {
        const auto j = strip(configs[i]);
        if (j != ref) {
            for (const auto& [key, value] : ref.items())
                if (j.at(key) != value)
                    throw IncompatibleConfigs("configs differ in '" + key + "'");
            throw IncompatibleConfigs("configs differ");
        }
    }
}

void write_compare_csv(std::ostream& out, std::span<const CompareRow> rows)
{
    out << "strategy,runs,best_accuracy,time_to_target_s,impr_a_pct,impr_b_pct\n";
    for (const auto& r : rows) {
        out << to_string(r.strategy) << ',' << r.runs << ',' << format_double(r.best_accuracy) << ','
            << (r.time_to_target_s ? format_double(*r.time_to_target_s) : "NA") << ','
            << format_double(r.impr_a_pct) << ',' << (r.impr_b_pct ? format_double(*r.impr_b_pct) : "NA") << '\n';
    }
}

} // namespace feddct
