#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "rsp/block_store.hpp"

namespace rsp {

// Synthetic benchmark generators. gaussian_mixture draws class labels
// uniformly and shifts one feature per class; uniform is label-free noise;
// sorted_adversarial is mixture data emitted sorted by (label, feature 1) —
// the worst case for sequential chunking.
enum class GenModel { gaussian_mixture, uniform, sorted_adversarial };

GenModel parse_gen_model(const std::string& name);
std::string gen_model_name(GenModel model);

Schema make_gen_schema(size_t features, uint32_t classes);

Manifest generate_dataset(const std::filesystem::path& dir, uint64_t records,
                          size_t features, uint32_t classes, GenModel model,
                          uint64_t seed, uint64_t block_records);

}  // namespace rsp
