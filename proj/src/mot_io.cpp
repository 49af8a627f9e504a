#include "sdof/mot_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>

#include "sdof/error.hpp"

namespace sdof::mot_io {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

// Calls `fn(line, line_number)` for every non-blank line.
void for_each_line(std::string_view text, const std::function<void(std::string_view, int)>& fn) {
    int number = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++number;
        line = trim(line);
        if (!line.empty()) fn(line, number);
    }
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    while (true) {
        const auto comma = line.find(',');
        fields.push_back(trim(line.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        line.remove_prefix(comma + 1);
    }
    return fields;
}

[[noreturn]] void parse_fail(int line, const std::string& what) {
    throw Error(Errc::ParseError, "line " + std::to_string(line) + ": " + what, {}, line);
}

double to_real(std::string_view field, int line, const char* name) {
    double value = 0.0;
    const auto* end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(field.data(), end, value);
    if (ec != std::errc{} || ptr != end || !std::isfinite(value))
        parse_fail(line, std::string("invalid ") + name + " '" + std::string(field) + "'");
    return value;
}

int to_int(std::string_view field, int line, const char* name) {
    const double v = to_real(field, line, name);
    if (v != std::floor(v) || std::abs(v) > 2e9) parse_fail(line, std::string(name) + " must be an integer");
    return static_cast<int>(v);
}

BBox read_box(const std::vector<std::string_view>& f, int line) {
    BBox b{to_real(f[2], line, "x"), to_real(f[3], line, "y"), to_real(f[4], line, "w"), to_real(f[5], line, "h")};
    if (!(b.w > 0.0) || !(b.h > 0.0))
        throw Error(Errc::NegativeDimensions, "line " + std::to_string(line) + ": width and height must be positive",
                    {}, line);
    return b;
}

int read_frame(std::string_view field, int line) {
    const int frame = to_int(field, line, "frame");
    if (frame < 1) parse_fail(line, "frame must be >= 1");
    return frame;
}

void append_fields(std::string& out, std::initializer_list<std::string> fields) {
    bool first = true;
    for (const auto& f : fields) {
        if (!first) out += ',';
        out += f;
        first = false;
    }
    out += '\n';
}

}  // namespace

std::string format_real(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc{}) throw Error(Errc::InvalidArgument, "cannot format value");
    std::string s(buf, ptr);
    if (s == "-0") s = "0";
    return s;
}

DetectionsByFrame parse_det(std::string_view text) {
    DetectionsByFrame out;
    for_each_line(text, [&](std::string_view line, int number) {
        const auto f = split_fields(line);
        if (f.size() != 7 && f.size() != 10)
            parse_fail(number, "expected 7 or 10 fields, found " + std::to_string(f.size()));
        DetRow row;
        row.frame = read_frame(f[0], number);
        row.id = to_int(f[1], number, "id");
        row.bbox = read_box(f, number);
        row.score = to_real(f[6], number, "score");
        if (f.size() == 10)
            for (std::size_t k = 0; k < 3; ++k) row.extra[k] = to_real(f[7 + k], number, "trailing field");
        out[row.frame].push_back(row);
    });
    return out;
}

std::vector<ResultRow> parse_results(std::string_view text) {
    std::vector<ResultRow> out;
    for_each_line(text, [&](std::string_view line, int number) {
        const auto f = split_fields(line);
        if (f.size() != 7 && f.size() != 10)
            parse_fail(number, "expected 7 or 10 fields, found " + std::to_string(f.size()));
        ResultRow row;
        row.frame = read_frame(f[0], number);
        row.id = to_int(f[1], number, "id");
        if (row.id < 1) parse_fail(number, "result id must be >= 1");
        row.bbox = read_box(f, number);
        row.conf = to_real(f[6], number, "conf");
        if (f.size() == 10)
            for (std::size_t k = 0; k < 3; ++k) row.extra[k] = to_real(f[7 + k], number, "trailing field");
        out.push_back(row);
    });
    return out;
}

std::vector<GtRow> parse_gt(std::string_view text) {
    std::vector<GtRow> out;
    for_each_line(text, [&](std::string_view line, int number) {
        const auto f = split_fields(line);
        if (f.size() != 9) parse_fail(number, "expected 9 fields, found " + std::to_string(f.size()));
        GtRow row;
        row.frame = read_frame(f[0], number);
        row.id = to_int(f[1], number, "id");
        if (row.id < 1) parse_fail(number, "ground-truth id must be >= 1");
        row.bbox = read_box(f, number);
        row.considered = to_int(f[6], number, "considered flag");
        row.cls = to_int(f[7], number, "class");
        row.visibility = to_real(f[8], number, "visibility");
        out.push_back(row);
    });
    return out;
}

std::string write_det(const DetectionsByFrame& detections) {
    std::string out;
    for (const auto& [frame, rows] : detections) {
        for (const DetRow& r : rows) {
            append_fields(out, {std::to_string(frame), std::to_string(r.id), format_real(r.bbox.x),
                                format_real(r.bbox.y), format_real(r.bbox.w), format_real(r.bbox.h),
                                format_real(r.score), format_real(r.extra[0]), format_real(r.extra[1]),
                                format_real(r.extra[2])});
        }
    }
    return out;
}

std::string write_results(const std::vector<ResultRow>& rows) {
    std::string out;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const ResultRow& r = rows[i];
        if (i > 0) {
            const ResultRow& p = rows[i - 1];
            if (std::pair(p.frame, p.id) >= std::pair(r.frame, r.id))
                throw Error(Errc::UnsortedInput, "results must be strictly sorted by (frame, id)", {},
                            static_cast<std::int64_t>(i));
        }
        append_fields(out, {std::to_string(r.frame), std::to_string(r.id), format_real(r.bbox.x),
                            format_real(r.bbox.y), format_real(r.bbox.w), format_real(r.bbox.h), format_real(r.conf),
                            format_real(r.extra[0]), format_real(r.extra[1]), format_real(r.extra[2])});
    }
    return out;
}

std::string write_gt(const std::vector<GtRow>& rows) {
    std::string out;
    for (const GtRow& r : rows) {
        append_fields(out, {std::to_string(r.frame), std::to_string(r.id), format_real(r.bbox.x),
                            format_real(r.bbox.y), format_real(r.bbox.w), format_real(r.bbox.h),
                            std::to_string(r.considered), std::to_string(r.cls), format_real(r.visibility)});
    }
    return out;
}

std::vector<ResultRow> to_result_rows(const std::vector<pipeline::OutputRecord>& records) {
    std::vector<ResultRow> rows;
    rows.reserve(records.size());
    for (const auto& rec : records) rows.push_back({rec.frame, rec.id, rec.bbox, rec.conf, {-1.0, -1.0, -1.0}});
    std::sort(rows.begin(), rows.end(),
              [](const ResultRow& a, const ResultRow& b) { return std::pair(a.frame, a.id) < std::pair(b.frame, b.id); });
    return rows;
}

std::string frame_path(const std::string& directory, int frame) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%06d.pgm", frame);
    return (std::filesystem::path(directory) / buf).string();
}

int count_frames(const std::string& directory) {
    std::error_code ec;
    if (!std::filesystem::is_directory(directory, ec))
        throw Error(Errc::IoError, "frames directory " + directory + " does not exist", directory);
    int highest = 0;
    for (const auto& entry : std::filesystem::directory_iterator(directory, ec)) {
        const auto name = entry.path().filename().string();
        if (name.size() != 10 || name.substr(6) != ".pgm") continue;
        if (!std::all_of(name.begin(), name.begin() + 6, [](char ch) { return ch >= '0' && ch <= '9'; })) continue;
        highest = std::max(highest, std::stoi(name.substr(0, 6)));
    }
    if (highest == 0) highest = 1;  // an empty directory reports 000001.pgm missing
    for (int t = 1; t <= highest; ++t) {
        const auto path = frame_path(directory, t);
        if (!std::filesystem::is_regular_file(path, ec))
            throw Error(Errc::IoError, "missing frame " + path, path, t);
    }
    return highest;
}

std::string mask_filename(int frame, int detection_index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%06d_%03d.pbm", frame, detection_index);
    return buf;
}

std::optional<imaging::BitMask> load_masks(const std::string& directory, int frame, int detection_index) {
    const auto path = std::filesystem::path(directory) / mask_filename(frame, detection_index);
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) return std::nullopt;
    const auto bytes = imaging::read_file(path.string());
    try {
        return imaging::load_pbm(bytes);
    } catch (const Error& e) {
        throw Error(Errc::MalformedPbm, path.string() + ": " + e.what(), path.string(), e.position());
    }
}

namespace {

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
    T out{};
    const auto* end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc{} || ptr != end)
        throw Error(Errc::InvalidValue, "invalid value '" + std::string(value) + "' for " + std::string(key),
                    std::string(key));
    if constexpr (std::is_floating_point_v<T>) {
        if (!std::isfinite(out))
            throw Error(Errc::InvalidValue, "non-finite value for " + std::string(key), std::string(key));
    }
    return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
    if (value == "true" || value == "1" || value == "on" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "off" || value == "no") return false;
    throw Error(Errc::InvalidValue, "invalid boolean '" + std::string(value) + "' for " + std::string(key),
                std::string(key));
}

}  // namespace

pipeline::Config parse_config(std::string_view text) {
    pipeline::Config c;
    using Setter = std::function<void(std::string_view, std::string_view)>;
    const std::map<std::string, Setter, std::less<>> setters = {
        {"L", [&](auto k, auto v) { c.L = parse_number<int>(k, v); }},
        {"M", [&](auto k, auto v) { c.M = parse_number<int>(k, v); }},
        {"Q", [&](auto k, auto v) { c.Q = parse_number<int>(k, v); }},
        {"R", [&](auto k, auto v) { c.R = parse_number<int>(k, v); }},
        {"epsilon", [&](auto k, auto v) { c.epsilon = parse_number<double>(k, v); }},
        {"tau_var", [&](auto k, auto v) { c.tau_var = parse_number<double>(k, v); }},
        {"score_thresh", [&](auto k, auto v) { c.score_thresh = parse_number<double>(k, v); }},
        {"head_frac", [&](auto k, auto v) { c.head_frac = parse_number<double>(k, v); }},
        {"erosion_iters", [&](auto k, auto v) { c.erosion_iters = parse_number<int>(k, v); }},
        {"hotelling_confidence", [&](auto k, auto v) { c.hotelling_confidence = parse_number<double>(k, v); }},
        {"seed", [&](auto k, auto v) { c.seed = parse_number<std::uint64_t>(k, v); }},
        {"enable_segmentation", [&](auto k, auto v) { c.enable_segmentation = parse_bool(k, v); }},
        {"enable_continuation", [&](auto k, auto v) { c.enable_continuation = parse_bool(k, v); }},
        {"enable_termination", [&](auto k, auto v) { c.enable_termination = parse_bool(k, v); }},
        {"lk_window_half", [&](auto k, auto v) { c.lk.window_half = parse_number<int>(k, v); }},
        {"lk_levels", [&](auto k, auto v) { c.lk.levels = parse_number<int>(k, v); }},
        {"lk_max_iters", [&](auto k, auto v) { c.lk.max_iters = parse_number<int>(k, v); }},
        {"lk_epsilon", [&](auto k, auto v) { c.lk.epsilon = parse_number<double>(k, v); }},
        {"lk_min_eigen", [&](auto k, auto v) { c.lk.min_eigen = parse_number<double>(k, v); }},
        {"lk_max_residual", [&](auto k, auto v) { c.lk.max_residual = parse_number<double>(k, v); }},
    };

    for_each_line(text, [&](std::string_view line, int number) {
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = trim(line.substr(0, hash));
        if (line.empty()) return;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw Error(Errc::ParseError, "line " + std::to_string(number) + ": expected key = value", {}, number);
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        const auto it = setters.find(key);
        if (it == setters.end())
            throw Error(Errc::UnknownKey, "unknown config key '" + std::string(key) + "'", std::string(key), number);
        it->second(key, value);
    });
    c.validate();
    return c;
}

std::string write_config(const pipeline::Config& c) {
    std::string out;
    auto line = [&](const char* key, const std::string& value) { out += std::string(key) + " = " + value + "\n"; };
    auto flag = [](bool b) { return std::string(b ? "true" : "false"); };
    line("L", std::to_string(c.L));
    line("M", std::to_string(c.M));
    line("Q", std::to_string(c.Q));
    line("R", std::to_string(c.R));
    line("epsilon", format_real(c.epsilon));
    line("tau_var", format_real(c.tau_var));
    line("score_thresh", format_real(c.score_thresh));
    line("head_frac", format_real(c.head_frac));
    line("erosion_iters", std::to_string(c.erosion_iters));
    line("hotelling_confidence", format_real(c.hotelling_confidence));
    line("seed", std::to_string(c.seed));
    line("enable_segmentation", flag(c.enable_segmentation));
    line("enable_continuation", flag(c.enable_continuation));
    line("enable_termination", flag(c.enable_termination));
    line("lk_window_half", std::to_string(c.lk.window_half));
    line("lk_levels", std::to_string(c.lk.levels));
    line("lk_max_iters", std::to_string(c.lk.max_iters));
    line("lk_epsilon", format_real(c.lk.epsilon));
    line("lk_min_eigen", format_real(c.lk.min_eigen));
    line("lk_max_residual", format_real(c.lk.max_residual));
    return out;
}

}  // namespace sdof::mot_io
