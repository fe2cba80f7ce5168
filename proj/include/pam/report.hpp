#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace pam {

inline constexpr int kSchemaVersion = 1;

/// Replay information attached to every JSON record.
struct Provenance {
    std::string command;
    std::uint64_t config_hash = 0;  ///< FNV-1a of the canonical config dump
    std::uint64_t seed = 0;
    std::string timestamp;          ///< UTC, ISO 8601; the only field that differs between replays
    std::string version;
};

/// Provenance for a config document: hash of its compact dump and the current time.
Provenance make_provenance(const std::string& command, const nlohmann::json& config, std::uint64_t seed);

nlohmann::json to_json(const Provenance& p);

/// Text file write; throws IoError on failure.
void write_text_file(const std::filesystem::path& path, const std::string& contents);

/// Writes {"schema_version", "provenance", ...record} as indented JSON.
void write_json_record(const std::filesystem::path& path, const nlohmann::json& record, const Provenance& provenance);

/// Shortest round-trip decimal form used by every CSV writer.
std::string format_number(double x);

/// A CSV table kept as text so that values pass through to plots unchanged.
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    std::string to_csv() const;
    /// Column index by name; throws ConfigError if absent.
    std::size_t column(const std::string& name) const;
};

/// Parses a header line plus comma-separated rows; throws IoError or ConfigError.
CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(const std::string& text);

/// One polyline: (x, y) given as the CSV tokens they came from.
struct PlotSeries {
    std::string name;
    std::vector<std::string> x;
    std::vector<std::string> y;
};

struct Plot {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<PlotSeries> series;
};

/// Line plot from a table: `x_column` against every other numeric column (or `y_columns`).
Plot plot_from_table(const CsvTable& table, const std::string& x_column, const std::vector<std::string>& y_columns = {},
                     const std::string& title = "");

/// Hand-emitted SVG: axes, ticks, one <polyline> per series with one vertex per row.
/// Each vertex's source values are repeated verbatim in the polyline's data-x and
/// data-y attributes. Non-finite entries are skipped.
std::string render_svg(const Plot& plot);

}  // namespace pam
