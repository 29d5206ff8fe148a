#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace coco {

// Exception hierarchy shared by all modules.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SchemaError : Error {
    using Error::Error;
};
struct RangeError : Error {
    using Error::Error;
};
struct SplitError : Error {
    using Error::Error;
};
struct StatsError : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};

// A probability value, kept in [0,1] at construction and after every
// transformation.
class Confidence {
  public:
    Confidence() : value_(0.0) {}
    explicit Confidence(double v) : value_(v) {
        if (!(v >= 0.0 && v <= 1.0))
            throw RangeError("confidence out of [0,1]: " + std::to_string(v));
    }
    // Clamping constructor for results of arithmetic that may step slightly
    // outside the interval.
    static Confidence clamped(double v) {
        if (v < 0.0) v = 0.0;
        if (v > 1.0) v = 1.0;
        return Confidence(v);
    }
    double value() const { return value_; }

  private:
    double value_;
};

// One time-step record of the monitoring dataset.
struct MonitorSample {
    std::int64_t trace_id = 0;
    std::int64_t step = 0;
    std::vector<double> monitor_values;   // one per monitor, each in [0,1]
    std::vector<bool> assumption_flags;   // aligned with monitor_values
    bool safety_flag = false;             // constant within a trace
};

struct Dataset {
    std::vector<MonitorSample> samples;
    int monitor_count = 0;
    std::map<std::string, std::string> metadata;

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }

    // Column extraction helpers used throughout calibration and evaluation.
    std::vector<double> monitor_column(int monitor_index) const;
    std::vector<bool> assumption_column(int monitor_index) const;
    std::vector<bool> safety_column() const;
    std::vector<std::int64_t> trace_ids() const;  // distinct, in first-appearance order
};

// Seed contract: identical (seed, stream_id) reproduces identical sequences.
struct RngSeed {
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
};

// Deterministic engine construction from a seed pair.
std::uint64_t mix_seed(const RngSeed& s);

enum class FileFormat { Csv, Json };

Dataset load_dataset(const std::string& path, FileFormat format);
void save_dataset(const Dataset& d, const std::string& path, FileFormat format);

// Partitions traces (never samples) between the two halves. The first half
// receives round(fraction * trace_count) traces, rounding half up.
std::pair<Dataset, Dataset> split_by_trace(const Dataset& d, double fraction,
                                           const RngSeed& seed);

// Sample mean and unbiased (n-1) variance of one monitor's values.
std::pair<double, double> monitor_stats(const Dataset& d, int monitor_index);

// Mean and unbiased variance of a raw value vector.
std::pair<double, double> mean_variance(const std::vector<double>& values);

}  // namespace coco
