#pragma once

#include <string>

#include "sia/adapter_bank.hpp"
#include "sia/classifier.hpp"
#include "sia/dataset.hpp"
#include "sia/feature_map.hpp"

namespace sia {

/// All on-disk artifacts share one container shape: a line-oriented text
/// header (magic token, format version, dimensions, metadata rows) closed by
/// a `blob <float-count>` line, then exactly that many little-endian 32-bit
/// floats. Real numbers in headers print with 17 significant digits and
/// reparse bit-exactly.

std::string format_double(double v);
double parse_double(const std::string& token);

std::string read_file(const std::string& path);
/// Writes through a sibling temp file and renames over the target, so a
/// failed write never leaves a partial file behind.
void write_file_atomic(const std::string& path, const std::string& bytes);

std::string dataset_to_bytes(const Dataset& ds);
Dataset dataset_from_bytes(const std::string& bytes);
void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

std::string text_bank_to_bytes(const TextEmbeddingBank& bank);
TextEmbeddingBank text_bank_from_bytes(const std::string& bytes);
void save_text_bank(const TextEmbeddingBank& bank, const std::string& path);
TextEmbeddingBank load_text_bank(const std::string& path);

std::string bank_to_bytes(const AdapterBank& bank);
AdapterBank bank_from_bytes(const std::string& bytes);
void save_bank(const AdapterBank& bank, const std::string& path);
AdapterBank load_bank(const std::string& path);

std::string feature_map_to_bytes(const FeatureMap& map);
FeatureMap feature_map_from_bytes(const std::string& bytes);
void save_feature_map(const FeatureMap& map, const std::string& path);
FeatureMap load_feature_map(const std::string& path);

} // namespace sia
