// Copyright 2026 The Saltstore Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace salt {

// CRC-32, reflected polynomial 0xEDB88320 (the zlib/PNG variant), so the
// checksums in the archive formats can be reproduced from any language.
uint32_t crc32(std::span<const uint8_t> data);
uint32_t crc32_update(uint32_t crc, std::span<const uint8_t> data);

}  // namespace salt
