#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "har/dataset.hpp"

namespace har::data {

// The four target activities, in class-index order. Codes are the dataset's
// own activity ids; everything else (including transient id 0) is discarded.
inline constexpr std::array<int, 4> kActivityCodes{3, 4, 12, 13};
inline constexpr std::array<const char*, 4> kClassNames{"standing", "walking", "ascending",
                                                        "descending"};
inline constexpr std::size_t kNumClasses = 4;
inline constexpr std::size_t kNumChannels = 6;
inline constexpr double kSamplePeriod = 0.01;  // 100 Hz

// class index for an activity code, or -1 when it is not a target activity
int class_of_activity(int code);

// One 10 ms tick: timestamp, activity code, and the six ankle channels
// (acceleration x/y/z in m/s^2, then angular velocity x/y/z in rad/s).
// Wireless dropouts appear as missing-flagged channels.
struct RawRecord {
    double timestamp = 0.0;
    int activity_id = 0;
    std::array<double, 6> channels{};
    std::array<bool, 6> missing{};

    bool any_missing() const {
        for (bool m : missing)
            if (m) return true;
        return false;
    }

    bool operator==(const RawRecord&) const = default;
};

// Parse one subject file: space-separated, 54 columns per line. Extracts
// column 0 (timestamp), 1 (activity id), 38-40 (ankle +-16g acceleration)
// and 44-46 (ankle gyroscope), 0-indexed; "NaN" tokens become missing flags.
// Malformed lines raise DataError naming `source` and the line number.
std::vector<RawRecord> parse_dat(const std::string& text, int subject_id,
                                 const std::string& source = "input");

// Refuse implausible sensor values (acceleration beyond +-500 m/s^2, angular
// velocity beyond +-100 rad/s, negative or absurd timestamps).
void check_plausible(const std::vector<RawRecord>& records, const std::string& source);

// Linear interpolation of missing-channel runs no longer than max_gap
// samples, per channel; longer runs and runs touching either end stay
// missing (the segmenter cuts there).
void interpolate_gaps(std::vector<RawRecord>& records, std::size_t max_gap = 10);

// Maximal run of one target activity with all channels present and
// timestamps advancing by one sample period.
struct ActivitySegment {
    int subject_id = 0;
    int class_index = 0;  // 0..3
    double start_timestamp = 0.0;
    std::size_t index = 0;  // position in the assembled dataset's segment list
    Tensor samples;         // L x 6
};

std::vector<ActivitySegment> segment_by_activity(const std::vector<RawRecord>& records,
                                                 int subject_id);

// Sliding windows at offsets 0, stride, 2*stride, ... while
// offset + length <= L; count = floor((L-length)/stride)+1 for L >= length.
std::vector<Window> build_windows(const ActivitySegment& segment, std::size_t length = 200,
                                  std::size_t stride = 60);

struct IngestOptions {
    std::size_t window = 200;
    std::size_t stride = 60;
    std::size_t max_gap = 10;
};

// subject id from a dataset file name like ".../subject101.dat"
int subject_from_filename(const std::string& path);

// Full pipeline over a set of subject files: parse, plausibility-check,
// interpolate, segment, window; segments are numbered globally in file order.
WindowedDataset ingest_pamap2(const std::vector<std::string>& files, const IngestOptions& opts);

// Desk-scale synthetic stand-in: four classes with distinct base frequency,
// amplitude and envelope on all six channels, per-subject gain/offset, and
// additive noise. windows_per_class is the total across subjects. Fully
// deterministic in the seed.
WindowedDataset generate_synthetic(std::size_t num_subjects = 8,
                                   std::size_t windows_per_class = 100, std::uint64_t seed = 0);

// Versioned little-endian cache of a windowed dataset, provenance included;
// read refuses wrong magic/version and truncated or oversized streams.
std::vector<std::uint8_t> write_cache(const WindowedDataset& ds);
WindowedDataset read_cache(const std::vector<std::uint8_t>& bytes);

void save_cache(const WindowedDataset& ds, const std::string& path);
WindowedDataset load_cache(const std::string& path);

}  // namespace har::data
