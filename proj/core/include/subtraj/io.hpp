#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <limits>
#include <map>

#include "subtraj/trajectory.hpp"

namespace subtraj {

/// Ingest-time cleaning knobs. Trajectories outside the length bounds
/// (measured after consecutive-duplicate removal) are dropped and counted,
/// never fatal. Everything structurally wrong in the file is fatal.
struct IngestOptions {
    std::size_t min_len = 2;
    std::size_t max_len = std::numeric_limits<std::size_t>::max();
};

struct IngestStats {
    std::size_t rows = 0;
    std::size_t kept = 0;
    std::size_t dropped_short = 0;
    std::size_t dropped_long = 0;
    std::size_t deduped_points = 0;
    std::map<std::size_t, std::size_t> length_histogram; // kept lengths
};

/// Reads trajectory CSV (`traj_id,seq,lon,lat[,t]`, one point per row) into
/// the store. Rows of one trajectory must be contiguous with ascending seq;
/// an optional header line is skipped. Malformed rows raise data_error with
/// the 1-based line number.
IngestStats ingest_csv(std::istream& in, TrajectoryStore& store, const IngestOptions& opts = {});
IngestStats ingest_csv_file(const std::filesystem::path& path, TrajectoryStore& store,
                            const IngestOptions& opts = {});

/// Writes trajectory CSV in the same row format (timestamps included when
/// present). The inverse of ingest for clean data.
void write_csv_file(const TrajectoryStore& store, const std::filesystem::path& path);

/// Versioned, checksummed binary trajectory store file.
void save_store(const TrajectoryStore& store, const std::filesystem::path& path);
TrajectoryStore load_store(const std::filesystem::path& path);

/// Stable digest of ids, lengths and coordinates; recorded inside index
/// files so a mismatched store/index pairing is detected at load time.
std::uint64_t store_fingerprint(const TrajectoryStore& store);

} // namespace subtraj
