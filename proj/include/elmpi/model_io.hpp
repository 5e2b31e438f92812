#pragma once

#include <string>

#include "elmpi/pi_pipeline.hpp"

namespace elmpi {

/// Version constant of the model container format.
inline constexpr const char* kModelFormatVersion = "elm-pi/1";

/// Writes the model as a versioned, checksummed text container. Doubles are
/// printed with 17 significant digits, so save→load round-trips values
/// exactly and save→load→save is byte-identical.
void save_model(const PiModel& model, const std::string& path);

PiModel load_model(const std::string& path);

}  // namespace elmpi
