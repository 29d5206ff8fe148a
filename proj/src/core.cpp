#include "coco/core.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

namespace coco {

std::vector<double> Dataset::monitor_column(int monitor_index) const {
    if (monitor_index < 0 || monitor_index >= monitor_count)
        throw RangeError("monitor index out of range");
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(s.monitor_values[monitor_index]);
    return out;
}

std::vector<bool> Dataset::assumption_column(int monitor_index) const {
    if (monitor_index < 0 || monitor_index >= monitor_count)
        throw RangeError("monitor index out of range");
    std::vector<bool> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(s.assumption_flags[monitor_index]);
    return out;
}

std::vector<bool> Dataset::safety_column() const {
    std::vector<bool> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(s.safety_flag);
    return out;
}

std::vector<std::int64_t> Dataset::trace_ids() const {
    std::vector<std::int64_t> ids;
    std::unordered_set<std::int64_t> seen;
    for (const auto& s : samples)
        if (seen.insert(s.trace_id).second) ids.push_back(s.trace_id);
    return ids;
}

std::uint64_t mix_seed(const RngSeed& s) {
    // splitmix64 of the pair, so distinct stream_ids give unrelated engines.
    std::uint64_t z = s.seed + 0x9e3779b97f4a7c15ULL * (s.stream_id + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {

void validate_sample(const MonitorSample& s, int monitor_count, std::size_t row) {
    if (static_cast<int>(s.monitor_values.size()) != monitor_count ||
        static_cast<int>(s.assumption_flags.size()) != monitor_count)
        throw SchemaError("row " + std::to_string(row) +
                          ": column count does not match monitor count");
    for (std::size_t i = 0; i < s.monitor_values.size(); ++i) {
        double m = s.monitor_values[i];
        if (!(m >= 0.0 && m <= 1.0))
            throw RangeError("row " + std::to_string(row) + ", monitor m_" +
                             std::to_string(i + 1) + ": confidence " +
                             std::to_string(m) + " outside [0,1]");
    }
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_real(const std::string& text, std::size_t row, const std::string& col) {
    // strtod instead of std::stod: the latter throws on subnormals (ERANGE),
    // which legitimately appear as near-zero monitor confidences.
    const char* begin = text.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (!text.empty() && end == begin + text.size() && std::isfinite(v)) return v;
    throw SchemaError("row " + std::to_string(row) + ", column " + col + ": cannot parse '" +
                      text + "'");
}

bool parse_flag(const std::string& text, std::size_t row, const std::string& col) {
    if (text == "0") return false;
    if (text == "1") return true;
    throw SchemaError("row " + std::to_string(row) + ", column " + col +
                      ": expected 0 or 1, got '" + text + "'");
}

Dataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open " + path);
    std::string header;
    if (!std::getline(in, header)) throw SchemaError(path + ": missing header");
    auto cols = split_csv_line(header);
    // trace_id,step,m_1..m_k,a_1..a_k,phi
    if (cols.size() < 5 || cols[0] != "trace_id" || cols[1] != "step" ||
        cols.back() != "phi" || (cols.size() - 3) % 2 != 0)
        throw SchemaError(path + ": malformed header '" + header + "'");
    int k = static_cast<int>((cols.size() - 3) / 2);
    for (int i = 0; i < k; ++i) {
        if (cols[2 + i] != "m_" + std::to_string(i + 1) ||
            cols[2 + k + i] != "a_" + std::to_string(i + 1))
            throw SchemaError(path + ": malformed header '" + header + "'");
    }

    Dataset d;
    d.monitor_count = k;
    std::string line;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        auto f = split_csv_line(line);
        if (f.size() != cols.size())
            throw SchemaError("row " + std::to_string(row) + ": expected " +
                              std::to_string(cols.size()) + " fields, got " +
                              std::to_string(f.size()));
        MonitorSample s;
        s.trace_id = static_cast<std::int64_t>(parse_real(f[0], row, "trace_id"));
        s.step = static_cast<std::int64_t>(parse_real(f[1], row, "step"));
        for (int i = 0; i < k; ++i)
            s.monitor_values.push_back(parse_real(f[2 + i], row, "m_" + std::to_string(i + 1)));
        for (int i = 0; i < k; ++i)
            s.assumption_flags.push_back(parse_flag(f[2 + k + i], row, "a_" + std::to_string(i + 1)));
        s.safety_flag = parse_flag(f.back(), row, "phi");
        validate_sample(s, k, row);
        d.samples.push_back(std::move(s));
    }
    return d;
}

Dataset load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(path + ": " + e.what());
    }
    if (!j.is_array()) throw SchemaError(path + ": expected a top-level array");
    Dataset d;
    d.monitor_count = -1;
    std::size_t row = 0;
    for (const auto& obj : j) {
        ++row;
        MonitorSample s;
        try {
            s.trace_id = obj.at("trace_id").get<std::int64_t>();
            s.step = obj.at("step").get<std::int64_t>();
            int i = 1;
            while (obj.contains("m_" + std::to_string(i))) {
                s.monitor_values.push_back(obj.at("m_" + std::to_string(i)).get<double>());
                s.assumption_flags.push_back(obj.at("a_" + std::to_string(i)).get<int>() != 0);
                ++i;
            }
            s.safety_flag = obj.at("phi").get<int>() != 0;
        } catch (const nlohmann::json::exception& e) {
            throw SchemaError("row " + std::to_string(row) + ": " + e.what());
        }
        if (d.monitor_count < 0) d.monitor_count = static_cast<int>(s.monitor_values.size());
        validate_sample(s, d.monitor_count, row);
        d.samples.push_back(std::move(s));
    }
    if (d.monitor_count < 0) d.monitor_count = 0;
    return d;
}

}  // namespace

Dataset load_dataset(const std::string& path, FileFormat format) {
    Dataset d = format == FileFormat::Csv ? load_csv(path) : load_json(path);
    // Per-trace safety must be constant.
    std::unordered_map<std::int64_t, bool> phi;
    for (std::size_t i = 0; i < d.samples.size(); ++i) {
        const auto& s = d.samples[i];
        auto [it, inserted] = phi.emplace(s.trace_id, s.safety_flag);
        if (!inserted && it->second != s.safety_flag)
            throw SchemaError("trace " + std::to_string(s.trace_id) +
                              ": safety flag changes within the trace");
    }
    return d;
}

void save_dataset(const Dataset& d, const std::string& path, FileFormat format) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    if (format == FileFormat::Csv) {
        out << "trace_id,step";
        for (int i = 1; i <= d.monitor_count; ++i) out << ",m_" << i;
        for (int i = 1; i <= d.monitor_count; ++i) out << ",a_" << i;
        out << ",phi\n";
        out.precision(17);
        for (const auto& s : d.samples) {
            out << s.trace_id << ',' << s.step;
            for (double m : s.monitor_values) out << ',' << m;
            for (bool a : s.assumption_flags) out << ',' << (a ? 1 : 0);
            out << ',' << (s.safety_flag ? 1 : 0) << '\n';
        }
    } else {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& s : d.samples) {
            nlohmann::json obj;
            obj["trace_id"] = s.trace_id;
            obj["step"] = s.step;
            for (int i = 0; i < d.monitor_count; ++i) {
                obj["m_" + std::to_string(i + 1)] = s.monitor_values[i];
                obj["a_" + std::to_string(i + 1)] = s.assumption_flags[i] ? 1 : 0;
            }
            obj["phi"] = s.safety_flag ? 1 : 0;
            j.push_back(std::move(obj));
        }
        out << j.dump(2) << '\n';
    }
}

std::pair<Dataset, Dataset> split_by_trace(const Dataset& d, double fraction,
                                           const RngSeed& seed) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw SplitError("fraction must lie in (0,1)");
    auto ids = d.trace_ids();
    if (ids.size() < 2) throw SplitError("need at least 2 traces to split");

    std::mt19937_64 rng(mix_seed(seed));
    std::shuffle(ids.begin(), ids.end(), rng);
    // Round half up.
    std::size_t first_count =
        static_cast<std::size_t>(std::floor(fraction * static_cast<double>(ids.size()) + 0.5));
    first_count = std::min(first_count, ids.size());

    std::unordered_set<std::int64_t> first_set(ids.begin(), ids.begin() + first_count);
    Dataset a, b;
    a.monitor_count = b.monitor_count = d.monitor_count;
    a.metadata = b.metadata = d.metadata;
    for (const auto& s : d.samples)
        (first_set.count(s.trace_id) ? a : b).samples.push_back(s);
    return {std::move(a), std::move(b)};
}

std::pair<double, double> mean_variance(const std::vector<double>& values) {
    if (values.empty()) throw StatsError("statistics of an empty value set");
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    if (values.size() == 1) return {mean, 0.0};
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, ss / static_cast<double>(values.size() - 1)};
}

std::pair<double, double> monitor_stats(const Dataset& d, int monitor_index) {
    if (d.empty()) throw StatsError("statistics of an empty dataset");
    return mean_variance(d.monitor_column(monitor_index));
}

}  // namespace coco
