#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "scafrest/synthesis.hpp"

namespace scafrest {

/// Serializes as JSON Lines: one header object carrying the format version,
/// config echo, and count table, then one object per SampleRecord.
void write_manifest(const DatasetManifest& manifest, std::ostream& out);
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

/// Parses a manifest and checks that stored tallies match the records.
/// Throws IoError on malformed input or a tally mismatch.
DatasetManifest read_manifest(std::istream& in);
DatasetManifest read_manifest(const std::filesystem::path& path);

/// Hex SHA-256 of a file's bytes.
std::string file_digest(const std::filesystem::path& path);

/// Hex SHA-256 of the manifest's serialized form.
std::string manifest_digest(const DatasetManifest& manifest);

}  // namespace scafrest
