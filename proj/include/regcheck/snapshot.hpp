#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "regcheck/systems.hpp"

namespace regcheck {

/// MFLD1 field file: the line "MFLD1", one line of JSON metadata
/// {"n", "length", "rank", "name"}, then the stored half-spectrum coefficients
/// as little-endian float64 (re, im) pairs, component-major. Coefficients are
/// written bit-exactly, so a read-back field is identical.
void write_field(const std::filesystem::path& path, const SpectralField& f, const std::string& name);
SpectralField read_field(const std::filesystem::path& path);

/// A state directory: state.json (kind, field files, optional forcing and
/// frozen director, free-form `extra`) plus one MFLD1 file per field.
void write_state(const std::filesystem::path& dir, const SystemState& state, const nlohmann::json& extra = {});
SystemState read_state(const std::filesystem::path& dir);

}  // namespace regcheck
