// Copyright 2026 The fsed Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FSED_WAV_HPP_
#define FSED_WAV_HPP_

#include <filesystem>
#include <iosfwd>
#include <string>

#include "fsed/dsp.hpp"

namespace fsed {

// Decodes a RIFF/WAVE container. Supports 16/24-bit integer PCM and 32-bit
// float, mono or multi-channel (channels are averaged to mono); integer PCM is
// scaled by the full negative range so 16-bit full scale maps to
// [-1, 32767/32768]. Unknown chunks are skipped. Throws ParseError on a
// truncated container and Error on unsupported codecs.
Waveform read_wav(std::istream& in);
Waveform read_wav(const std::string& bytes);
Waveform read_wav_file(const std::filesystem::path& path);

// Writes mono 16-bit PCM; samples are clamped to [-1, 1] and rounded.
void write_wav16(std::ostream& out, const Waveform& w);
void write_wav16_file(const std::filesystem::path& path, const Waveform& w);

}  // namespace fsed

#endif  // FSED_WAV_HPP_
