#pragma once

#include <map>
#include <string>

#include "bvq/tensor.hpp"

namespace bvq {

// Parameter checkpoint container. On disk ("BVQP"):
//   magic "BVQP", u32 version, u32 tensor count, then per tensor:
//   u32 name length, UTF-8 name, u32 rank, u32 extents, raw f32 payload.
// All integers little-endian.
constexpr uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::string& path, const std::map<std::string, Tensor>& tensors);
std::map<std::string, Tensor> load_checkpoint(const std::string& path);

}  // namespace bvq
