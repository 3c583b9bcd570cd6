#include "har/pamap2.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "har/binio.hpp"
#include "har/error.hpp"
#include "har/rng.hpp"

namespace har::data {

namespace {

constexpr std::size_t kColumns = 54;
// 0-indexed source columns: timestamp, activity id, ankle +-16g acceleration
// x/y/z, ankle gyroscope x/y/z.
constexpr std::size_t kTimestampCol = 0;
constexpr std::size_t kActivityCol = 1;
constexpr std::array<std::size_t, 6> kChannelCols{38, 39, 40, 44, 45, 46};

[[noreturn]] void line_error(const std::string& source, std::size_t line, const std::string& what) {
    throw DataError(source + " line " + std::to_string(line) + ": " + what);
}

}  // namespace

int class_of_activity(int code) {
    for (std::size_t i = 0; i < kActivityCodes.size(); ++i) {
        if (kActivityCodes[i] == code) return static_cast<int>(i);
    }
    return -1;
}

std::vector<RawRecord> parse_dat(const std::string& text, int subject_id,
                                 const std::string& source) {
    (void)subject_id;  // records are per-file; the caller tags segments
    std::vector<RawRecord> records;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    std::array<const char*, kColumns> token{};

    while (pos < text.size()) {
        ++line_no;
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        const char* p = text.data() + pos;
        const char* end = text.data() + eol;
        pos = eol + 1;

        // tokenize in place: record the start of each column
        std::size_t count = 0;
        while (p < end) {
            while (p < end && std::isspace(static_cast<unsigned char>(*p))) ++p;
            if (p >= end) break;
            if (count < kColumns) token[count] = p;
            ++count;
            while (p < end && !std::isspace(static_cast<unsigned char>(*p))) ++p;
        }
        if (count == 0) continue;  // blank line
        if (count != kColumns) {
            line_error(source, line_no,
                       "expected " + std::to_string(kColumns) + " columns, got " +
                           std::to_string(count));
        }

        auto parse_field = [&](std::size_t col, const char* what) {
            char* field_end = nullptr;
            double v = std::strtod(token[col], &field_end);
            if (field_end == token[col]) {
                line_error(source, line_no,
                           std::string("unreadable ") + what + " in column " + std::to_string(col));
            }
            return v;
        };

        RawRecord r;
        r.timestamp = parse_field(kTimestampCol, "timestamp");
        if (!std::isfinite(r.timestamp)) line_error(source, line_no, "non-finite timestamp");
        double activity = parse_field(kActivityCol, "activity id");
        if (!std::isfinite(activity)) line_error(source, line_no, "non-finite activity id");
        r.activity_id = static_cast<int>(std::lround(activity));
        for (std::size_t c = 0; c < kNumChannels; ++c) {
            double v = parse_field(kChannelCols[c], "sensor value");
            if (std::isnan(v)) {
                r.missing[c] = true;
                r.channels[c] = 0.0;
            } else {
                r.channels[c] = v;
            }
        }
        records.push_back(r);
    }
    return records;
}

void check_plausible(const std::vector<RawRecord>& records, const std::string& source) {
    for (std::size_t i = 0; i < records.size(); ++i) {
        const RawRecord& r = records[i];
        if (r.timestamp < 0.0 || r.timestamp > 1e7) {
            throw DataError(source + " record " + std::to_string(i) + ": implausible timestamp " +
                            std::to_string(r.timestamp));
        }
        for (std::size_t c = 0; c < kNumChannels; ++c) {
            if (r.missing[c]) continue;
            double limit = c < 3 ? 500.0 : 100.0;  // m/s^2 vs rad/s
            if (!std::isfinite(r.channels[c]) || std::abs(r.channels[c]) > limit) {
                throw DataError(source + " record " + std::to_string(i) + ": implausible value " +
                                std::to_string(r.channels[c]) + " on channel " + std::to_string(c));
            }
        }
    }
}

void interpolate_gaps(std::vector<RawRecord>& records, std::size_t max_gap) {
    for (std::size_t c = 0; c < kNumChannels; ++c) {
        std::size_t i = 0;
        while (i < records.size()) {
            if (!records[i].missing[c]) {
                ++i;
                continue;
            }
            std::size_t j = i;
            while (j < records.size() && records[j].missing[c]) ++j;
            // run [i, j); interpolate only with both neighbors present
            if (i > 0 && j < records.size() && j - i <= max_gap) {
                double left = records[i - 1].channels[c];
                double right = records[j].channels[c];
                double span = static_cast<double>(j - (i - 1));
                for (std::size_t k = i; k < j; ++k) {
                    double t = static_cast<double>(k - (i - 1)) / span;
                    records[k].channels[c] = left + t * (right - left);
                    records[k].missing[c] = false;
                }
            }
            i = j;
        }
    }
}

std::vector<ActivitySegment> segment_by_activity(const std::vector<RawRecord>& records,
                                                 int subject_id) {
    std::vector<ActivitySegment> segments;
    std::vector<std::size_t> run;
    int run_class = -1;

    auto flush = [&]() {
        if (!run.empty()) {
            ActivitySegment seg;
            seg.subject_id = subject_id;
            seg.class_index = run_class;
            seg.start_timestamp = records[run.front()].timestamp;
            seg.samples = Tensor({run.size(), kNumChannels});
            for (std::size_t i = 0; i < run.size(); ++i) {
                for (std::size_t c = 0; c < kNumChannels; ++c) {
                    seg.samples(i, c) = records[run[i]].channels[c];
                }
            }
            segments.push_back(std::move(seg));
        }
        run.clear();
        run_class = -1;
    };

    for (std::size_t i = 0; i < records.size(); ++i) {
        const RawRecord& r = records[i];
        int cls = class_of_activity(r.activity_id);
        if (cls < 0 || r.any_missing()) {
            flush();
            continue;
        }
        if (!run.empty()) {
            double dt = r.timestamp - records[run.back()].timestamp;
            bool continuous = std::abs(dt - kSamplePeriod) <= 0.5 * kSamplePeriod;
            if (cls != run_class || !continuous) flush();
        }
        if (run.empty()) run_class = cls;
        run.push_back(i);
    }
    flush();
    return segments;
}

std::vector<Window> build_windows(const ActivitySegment& segment, std::size_t length,
                                  std::size_t stride) {
    if (length == 0 || stride == 0) throw ConfigError("window length and stride must be positive");
    std::vector<Window> windows;
    std::size_t L = segment.samples.dim(0);
    if (L < length) return windows;
    for (std::size_t offset = 0; offset + length <= L; offset += stride) {
        Window w;
        w.samples = Tensor({length, kNumChannels});
        for (std::size_t t = 0; t < length; ++t) {
            for (std::size_t c = 0; c < kNumChannels; ++c) {
                w.samples(t, c) = segment.samples(offset + t, c);
            }
        }
        w.label = Tensor({kNumClasses});
        w.label[static_cast<std::size_t>(segment.class_index)] = 1.0;
        w.subject_id = segment.subject_id;
        w.segment_index = segment.index;
        w.offset = offset;
        windows.push_back(std::move(w));
    }
    return windows;
}

int subject_from_filename(const std::string& path) {
    std::size_t slash = path.find_last_of("/\\");
    std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
    // last run of digits in the file name, e.g. "subject101.dat" -> 101
    int value = -1;
    for (std::size_t i = 0; i < name.size(); ++i) {
        if (std::isdigit(static_cast<unsigned char>(name[i]))) {
            std::size_t j = i;
            while (j < name.size() && std::isdigit(static_cast<unsigned char>(name[j]))) ++j;
            value = std::atoi(name.substr(i, j - i).c_str());
            i = j;
        }
    }
    if (value < 0) throw ConfigError("cannot find a subject id in file name '" + name + "'");
    return value;
}

WindowedDataset ingest_pamap2(const std::vector<std::string>& files, const IngestOptions& opts) {
    if (files.empty()) throw ConfigError("ingest: no input files");
    WindowedDataset ds;
    std::size_t segment_counter = 0;
    for (const std::string& path : files) {
        int subject = subject_from_filename(path);
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IoError("cannot open '" + path + "' for reading");
        std::ostringstream buf;
        buf << in.rdbuf();
        std::string text = std::move(buf).str();

        std::vector<RawRecord> records = parse_dat(text, subject, path);
        check_plausible(records, path);
        interpolate_gaps(records, opts.max_gap);
        for (ActivitySegment& seg : segment_by_activity(records, subject)) {
            seg.index = segment_counter++;
            std::vector<Window> windows = build_windows(seg, opts.window, opts.stride);
            std::move(windows.begin(), windows.end(), std::back_inserter(ds.windows));
        }
        ds.provenance.source_files.push_back(path);
    }
    ds.provenance.units_note =
        "ankle acceleration m/s^2 (+-16g), ankle angular velocity rad/s; raw units, "
        "z-scored per fold at training time";
    ds.provenance.window_size = opts.window;
    ds.provenance.stride = opts.stride;
    ds.provenance.max_gap = opts.max_gap;
    ds.provenance.synthetic = false;

    std::string hash_text = "ingest|w=" + std::to_string(opts.window) +
                            "|s=" + std::to_string(opts.stride) +
                            "|g=" + std::to_string(opts.max_gap);
    for (const auto& f : ds.provenance.source_files) hash_text += "|" + f;
    ds.provenance.config_hash = fnv1a64(hash_text);
    return ds;
}

// ---- synthetic data ---------------------------------------------------------

namespace {

// class-specific signal recipe: base frequency (Hz), oscillation amplitude,
// per-channel DC level, and an envelope shape over the window
constexpr std::array<double, 4> kSynthFreq{0.7, 1.8, 3.1, 4.6};
constexpr std::array<double, 4> kSynthAmp{0.4, 1.0, 1.6, 2.2};
constexpr std::array<double, 4> kSynthBase{-1.2, -0.3, 0.6, 1.5};

double envelope(std::size_t cls, double frac) {
    switch (cls) {
        case 0: return 1.0;               // standing: flat, small amplitude
        case 1: return 1.0;               // walking: steady oscillation
        case 2: return 0.2 + 1.2 * frac;  // ascending: effort ramps up
        default: return 1.4 - 1.2 * frac; // descending: effort ramps down
    }
}

}  // namespace

WindowedDataset generate_synthetic(std::size_t num_subjects, std::size_t windows_per_class,
                                   std::uint64_t seed) {
    if (num_subjects < 2) throw ConfigError("generate_synthetic: need at least 2 subjects");
    if (windows_per_class < num_subjects) {
        throw ConfigError("generate_synthetic: need at least one window per class per subject");
    }
    constexpr std::size_t kSteps = 200;
    WindowedDataset ds;
    Rng root(seed);

    std::size_t window_counter = 0;
    for (std::size_t s = 0; s < num_subjects; ++s) {
        int subject_id = 101 + static_cast<int>(s);
        Rng srng = root.stream(static_cast<std::uint64_t>(subject_id));
        std::array<double, kNumChannels> gain{}, offset{};
        for (std::size_t c = 0; c < kNumChannels; ++c) {
            gain[c] = srng.uniform(0.85, 1.15);
            offset[c] = srng.uniform(-0.25, 0.25);
        }

        for (std::size_t cls = 0; cls < kNumClasses; ++cls) {
            std::size_t count = windows_per_class / num_subjects +
                                (s < windows_per_class % num_subjects ? 1 : 0);
            Rng wrng = srng.stream(cls);
            for (std::size_t wi = 0; wi < count; ++wi) {
                Window w;
                w.samples = Tensor({kSteps, kNumChannels});
                w.label = Tensor({kNumClasses});
                w.label[cls] = 1.0;
                w.subject_id = subject_id;
                w.segment_index = window_counter;
                w.offset = 0;

                std::array<double, kNumChannels> phase{};
                for (std::size_t c = 0; c < kNumChannels; ++c) {
                    phase[c] = wrng.uniform(0.0, 6.283185307179586);
                }
                for (std::size_t t = 0; t < kSteps; ++t) {
                    double frac = static_cast<double>(t) / static_cast<double>(kSteps - 1);
                    double env = envelope(cls, frac);
                    for (std::size_t c = 0; c < kNumChannels; ++c) {
                        double chan_scale = 1.0 + 0.1 * static_cast<double>(c);
                        double freq = kSynthFreq[cls] * (1.0 + 0.07 * static_cast<double>(c));
                        double wave = std::sin(6.283185307179586 * freq *
                                                   (static_cast<double>(t) * kSamplePeriod) +
                                               phase[c]);
                        double value = kSynthBase[cls] * chan_scale + kSynthAmp[cls] * env * wave;
                        w.samples(t, c) = gain[c] * value + offset[c] + 0.12 * wrng.gaussian();
                    }
                }
                ds.windows.push_back(std::move(w));
                ++window_counter;
            }
        }
    }

    ds.provenance.source_files = {"synthetic"};
    ds.provenance.units_note = "synthetic unitless channels";
    ds.provenance.window_size = kSteps;
    ds.provenance.stride = kSteps;
    ds.provenance.max_gap = 0;
    ds.provenance.synthetic = true;
    ds.provenance.config_hash =
        fnv1a64("synthetic|n=" + std::to_string(num_subjects) +
                "|w=" + std::to_string(windows_per_class) + "|seed=" + std::to_string(seed));
    return ds;
}

// ---- cache ------------------------------------------------------------------

namespace {
constexpr std::uint32_t kCacheMagic = 0x43524148;  // "HARC" little-endian
constexpr std::uint32_t kCacheVersion = 1;
}  // namespace

std::vector<std::uint8_t> write_cache(const WindowedDataset& ds) {
    if (ds.windows.empty()) throw DataError("write_cache: dataset has no windows");
    std::size_t rows = ds.windows.front().samples.dim(0);
    std::size_t cols = ds.windows.front().samples.dim(1);
    std::size_t classes = ds.windows.front().label.size();

    ByteWriter w;
    w.u32(kCacheMagic);
    w.u32(kCacheVersion);
    w.u32(static_cast<std::uint32_t>(ds.provenance.source_files.size()));
    for (const auto& f : ds.provenance.source_files) w.str(f);
    w.str(ds.provenance.units_note);
    w.u64(ds.provenance.window_size);
    w.u64(ds.provenance.stride);
    w.u64(ds.provenance.max_gap);
    w.u8(ds.provenance.synthetic ? 1 : 0);
    w.u64(ds.provenance.config_hash);

    w.u32(static_cast<std::uint32_t>(rows));
    w.u32(static_cast<std::uint32_t>(cols));
    w.u32(static_cast<std::uint32_t>(classes));
    w.u64(ds.windows.size());
    for (const Window& win : ds.windows) {
        if (win.samples.dim(0) != rows || win.samples.dim(1) != cols ||
            win.label.size() != classes) {
            throw DataError("write_cache: windows are not homogeneous");
        }
        std::size_t cls = 0;
        bool found = false;
        for (std::size_t i = 0; i < classes; ++i) {
            if (win.label[i] == 1.0 && !found) {
                cls = i;
                found = true;
            } else if (win.label[i] != 0.0) {
                throw DataError("write_cache: window label is not one-hot");
            }
        }
        if (!found) throw DataError("write_cache: window label is not one-hot");
        w.u32(static_cast<std::uint32_t>(win.subject_id));
        w.u64(win.segment_index);
        w.u64(win.offset);
        w.u8(static_cast<std::uint8_t>(cls));
        for (double v : win.samples.flat()) w.f64(v);
    }
    return w.bytes;
}

WindowedDataset read_cache(const std::vector<std::uint8_t>& bytes) {
    ByteReader r(bytes, "dataset cache");
    if (r.u32() != kCacheMagic) throw IoError("dataset cache: bad magic, not a cache file");
    std::uint32_t version = r.u32();
    if (version != kCacheVersion) {
        throw IoError("dataset cache: unsupported version " + std::to_string(version));
    }

    WindowedDataset ds;
    std::uint32_t nfiles = r.u32();
    for (std::uint32_t i = 0; i < nfiles; ++i) ds.provenance.source_files.push_back(r.str());
    ds.provenance.units_note = r.str();
    ds.provenance.window_size = static_cast<std::size_t>(r.u64());
    ds.provenance.stride = static_cast<std::size_t>(r.u64());
    ds.provenance.max_gap = static_cast<std::size_t>(r.u64());
    ds.provenance.synthetic = r.u8() != 0;
    ds.provenance.config_hash = r.u64();

    std::size_t rows = r.u32();
    std::size_t cols = r.u32();
    std::size_t classes = r.u32();
    std::uint64_t count = r.u64();
    if (rows == 0 || cols == 0 || classes == 0) throw IoError("dataset cache: zero dimensions");
    for (std::uint64_t i = 0; i < count; ++i) {
        Window w;
        w.subject_id = static_cast<int>(r.u32());
        w.segment_index = static_cast<std::size_t>(r.u64());
        w.offset = static_cast<std::size_t>(r.u64());
        std::uint8_t cls = r.u8();
        if (cls >= classes) throw IoError("dataset cache: class index out of range");
        w.label = Tensor({classes});
        w.label[cls] = 1.0;
        w.samples = Tensor({rows, cols});
        for (double& v : w.samples.flat()) v = r.f64();
        ds.windows.push_back(std::move(w));
    }
    r.expect_done();
    return ds;
}

void save_cache(const WindowedDataset& ds, const std::string& path) {
    write_file_bytes(path, write_cache(ds));
}

WindowedDataset load_cache(const std::string& path) {
    return read_cache(read_file_bytes(path));
}

}  // namespace har::data
