#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "sonowork/synth.hpp"

namespace sonowork {

/// 16-bit quantization: round(s * 32767) clamped to [-32768, 32767], so
/// full scale is symmetric (+1 -> 32767, -1 -> -32767).
inline std::int16_t quantize_pcm16(double s) {
  if (std::isnan(s)) return 0;
  const double scaled = std::round(s * 32767.0);
  if (scaled > 32767.0) return 32767;
  if (scaled < -32768.0) return -32768;
  return static_cast<std::int16_t>(scaled);
}

/// RIFF/WAVE, PCM, mono, 16-bit little-endian with the canonical 44-byte
/// header. Written byte by byte so the output does not depend on host
/// endianness.
inline std::vector<std::uint8_t> write_wav(const AudioBuffer& buffer) {
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(buffer.size() * 2);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  auto tag = [&](const char (&s)[5]) { out.insert(out.end(), s, s + 4); };
  auto u16 = [&](std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
  };
  auto u32 = [&](std::uint32_t v) {
    for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<std::uint8_t>((v >> shift) & 0xFF));
  };

  tag("RIFF");
  u32(36 + data_bytes);
  tag("WAVE");
  tag("fmt ");
  u32(16);                        // fmt chunk size
  u16(1);                         // PCM
  u16(1);                         // mono
  u32(buffer.sample_rate);
  u32(buffer.sample_rate * 2);    // byte rate
  u16(2);                         // block align
  u16(16);                        // bits per sample
  tag("data");
  u32(data_bytes);
  for (double s : buffer.samples) u16(static_cast<std::uint16_t>(quantize_pcm16(s)));
  return out;
}

inline std::string wav_string(const AudioBuffer& buffer) {
  const auto bytes = write_wav(buffer);
  return {bytes.begin(), bytes.end()};
}

}  // namespace sonowork
