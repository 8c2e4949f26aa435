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

#include <iosfwd>
#include <string>
#include <vector>

#include "salt/codec.hpp"

namespace salt::cli {

// Exit statuses: 0 success, 1 usage error, 2 data error (CRC mismatch,
// unrecoverable stripes), 3 internal error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitInternal = 3;

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

// Raw clip files: width and height as 16-bit little-endian, frame count as
// 32-bit, then planar 8-bit samples.
std::vector<codec::Frame> read_clip(const std::string& path);
void write_clip(const std::string& path,
                const std::vector<codec::Frame>& frames);
Bytes encode_clip(const std::vector<codec::Frame>& frames);
std::vector<codec::Frame> decode_clip(std::span<const uint8_t> data);

}  // namespace salt::cli
