#pragma once

#include <string>

#include "crcca/crcca.hpp"
#include "crcca/linear_cca.hpp"

namespace crcca {

inline constexpr int kModelFormatVersion = 1;

void save_model(const LinearCcaModel& model, const std::string& path);
void save_model(const CrccaModel& model, const std::string& path);

// "linear_cca" or "crcca"; reads only the header fields.
std::string model_kind(const std::string& path);

LinearCcaModel load_linear_cca(const std::string& path);
CrccaModel load_crcca(const std::string& path);

}  // namespace crcca
