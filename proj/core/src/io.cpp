#include "subtraj/io.hpp"

#include <cmath>
#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_set>
#include <vector>

#include "subtraj/detail/binio.hpp"

namespace subtraj {

namespace {

constexpr std::string_view kStoreMagic = "SBTRSTO1";
constexpr std::uint32_t kStoreVersion = 1;

[[noreturn]] void bad_row(std::size_t line, const std::string& what) {
    throw data_error("csv line " + std::to_string(line) + ": " + what);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s, std::size_t line, const char* field) {
    double v = 0;
    const char* b = s.data();
    const char* e = b + s.size();
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e) bad_row(line, std::string("non-numeric ") + field + " '" + s + "'");
    if (!std::isfinite(v)) bad_row(line, std::string("non-finite ") + field);
    return v;
}

long long parse_int(const std::string& s, std::size_t line, const char* field) {
    long long v = 0;
    const char* b = s.data();
    const char* e = b + s.size();
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e) bad_row(line, std::string("non-integer ") + field + " '" + s + "'");
    return v;
}

struct PendingTraj {
    std::string id;
    std::vector<Point> points;
    long long last_seq = 0;
    std::size_t first_line = 0;
    bool has_t = false;
};

void flush_pending(PendingTraj& cur, TrajectoryStore& store, const IngestOptions& opts,
                   IngestStats& stats) {
    if (cur.id.empty()) return;
    const std::size_t len = cur.points.size();
    if (len < std::max<std::size_t>(opts.min_len, 2)) {
        ++stats.dropped_short;
    } else if (len > opts.max_len) {
        ++stats.dropped_long;
    } else {
        store.insert(Trajectory{cur.id, std::move(cur.points)});
        ++stats.kept;
        ++stats.length_histogram[len];
    }
    cur = PendingTraj{};
}

} // namespace

IngestStats ingest_csv(std::istream& in, TrajectoryStore& store, const IngestOptions& opts) {
    IngestStats stats;
    PendingTraj cur;
    std::string line;
    std::size_t line_no = 0;
    bool first_content_line = true;
    std::unordered_set<std::string> seen; // ids already flushed, to reject split blocks

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_fields(line);
        if (first_content_line && fields.size() >= 4 && fields[0] == "traj_id") {
            first_content_line = false;
            continue; // header
        }
        first_content_line = false;
        if (fields.size() != 4 && fields.size() != 5)
            bad_row(line_no, "expected 4 or 5 fields, got " + std::to_string(fields.size()));

        const std::string& id = fields[0];
        if (id.empty()) bad_row(line_no, "empty traj_id");
        const long long seq = parse_int(fields[1], line_no, "seq");
        Point p;
        p.lon = parse_double(fields[2], line_no, "lon");
        p.lat = parse_double(fields[3], line_no, "lat");
        if (p.lon < -180.0 || p.lon > 180.0) bad_row(line_no, "lon out of [-180, 180]");
        if (p.lat < -90.0 || p.lat > 90.0) bad_row(line_no, "lat out of [-90, 90]");
        const bool row_has_t = fields.size() == 5 && !fields[4].empty();
        if (row_has_t) p.t = parse_double(fields[4], line_no, "t");

        ++stats.rows;
        if (id != cur.id) {
            flush_pending(cur, store, opts, stats);
            if (!seen.insert(id).second)
                bad_row(line_no, "rows for trajectory '" + id + "' are not contiguous");
            cur.id = id;
            cur.first_line = line_no;
            cur.has_t = row_has_t;
        } else {
            if (seq <= cur.last_seq) bad_row(line_no, "seq not ascending within trajectory");
            if (row_has_t != cur.has_t) bad_row(line_no, "inconsistent timestamp presence");
            if (row_has_t && !cur.points.empty() && cur.points.back().t &&
                *p.t <= *cur.points.back().t)
                bad_row(line_no, "timestamps not strictly increasing");
        }
        cur.last_seq = seq;

        if (!cur.points.empty() && cur.points.back().lon == p.lon &&
            cur.points.back().lat == p.lat) {
            ++stats.deduped_points; // consecutive duplicate position
        } else {
            cur.points.push_back(p);
        }
    }
    flush_pending(cur, store, opts, stats);
    return stats;
}

IngestStats ingest_csv_file(const std::filesystem::path& path, TrajectoryStore& store,
                            const IngestOptions& opts) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open '" + path.string() + "'");
    return ingest_csv(in, store, opts);
}

void write_csv_file(const TrajectoryStore& store, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write '" + path.string() + "'");
    out << "traj_id,seq,lon,lat,t\n";
    char buf[64];
    for (std::uint32_t s = 0; s < store.size(); ++s) {
        const Trajectory& t = store.at(s);
        for (std::size_t i = 0; i < t.points.size(); ++i) {
            const Point& p = t.points[i];
            out << t.id << ',' << (i + 1) << ',';
            std::snprintf(buf, sizeof buf, "%.17g,%.17g", p.lon, p.lat);
            out << buf << ',';
            if (p.t) {
                std::snprintf(buf, sizeof buf, "%.17g", *p.t);
                out << buf;
            }
            out << '\n';
        }
    }
}

void save_store(const TrajectoryStore& store, const std::filesystem::path& path) {
    detail::ByteWriter w;
    w.raw(kStoreMagic);
    w.u32(kStoreVersion);
    w.u64(store.size());
    for (std::uint32_t s = 0; s < store.size(); ++s) {
        const Trajectory& t = store.at(s);
        w.str(t.id);
        w.u32(static_cast<std::uint32_t>(t.points.size()));
        const bool has_t = !t.points.empty() && t.points[0].t.has_value();
        w.u8(has_t ? 1 : 0);
        for (const Point& p : t.points) {
            w.f64(p.lon);
            w.f64(p.lat);
            if (has_t) w.f64(p.t.value_or(0.0));
        }
    }
    const std::uint64_t digest = detail::fnv1a_bytes(w.bytes());
    w.u64(digest);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw data_error("cannot write '" + path.string() + "'");
    out.write(w.bytes().data(), static_cast<std::streamsize>(w.bytes().size()));
}

TrajectoryStore load_store(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string data = ss.str();

    if (data.size() < kStoreMagic.size() + 12) throw truncation_error("store file too small");
    if (std::string_view(data).substr(0, kStoreMagic.size()) != kStoreMagic)
        throw data_error("not a trajectory store file");
    const std::uint64_t declared =
        detail::ByteReader(std::string_view(data).substr(data.size() - 8)).u64();
    if (detail::fnv1a_bytes(std::string_view(data).substr(0, data.size() - 8)) != declared)
        throw checksum_error("store checksum mismatch");

    detail::ByteReader r(std::string_view(data).substr(0, data.size() - 8));
    r.take(kStoreMagic.size());
    const std::uint32_t version = r.u32();
    if (version != kStoreVersion)
        throw version_error("unsupported store version " + std::to_string(version));

    TrajectoryStore store;
    const std::uint64_t n = r.u64();
    for (std::uint64_t i = 0; i < n; ++i) {
        Trajectory t;
        t.id = r.str();
        const std::uint32_t len = r.u32();
        const bool has_t = r.u8() != 0;
        t.points.reserve(len);
        for (std::uint32_t j = 0; j < len; ++j) {
            Point p;
            p.lon = r.f64();
            p.lat = r.f64();
            if (has_t) p.t = r.f64();
            t.points.push_back(p);
        }
        store.insert(std::move(t));
    }
    return store;
}

std::uint64_t store_fingerprint(const TrajectoryStore& store) {
    detail::ByteWriter w;
    w.u64(store.size());
    for (std::uint32_t s = 0; s < store.size(); ++s) {
        const Trajectory& t = store.at(s);
        w.str(t.id);
        w.u32(static_cast<std::uint32_t>(t.points.size()));
        for (const Point& p : t.points) {
            w.f64(p.lon);
            w.f64(p.lat);
        }
    }
    return detail::fnv1a_bytes(w.bytes());
}

} // namespace subtraj
