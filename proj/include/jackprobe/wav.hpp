#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "jackprobe/audio.hpp"

namespace jackprobe {

enum class WavEncoding { pcm16, float32 };

/// Decodes a RIFF/WAVE image (PCM-16 or IEEE float32, 1-2 channels).
/// PCM-16 value v maps to v / 32768.
AudioBuffer decode_wav(std::span<const std::uint8_t> bytes);

/// Canonical 44-byte-header RIFF/WAVE image. PCM-16 clamps to [-1, 1] first.
std::vector<std::uint8_t> encode_wav(const AudioBuffer& buffer, WavEncoding encoding);

AudioBuffer read_wav(const std::filesystem::path& path);

/// Writes nothing unless the whole file can be created.
void write_wav(const AudioBuffer& buffer, const std::filesystem::path& path,
               WavEncoding encoding = WavEncoding::pcm16);

}  // namespace jackprobe
