#include "pitchbench/wav.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "pitchbench/errors.hpp"

namespace pitchbench {

namespace {

void put_u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  b.push_back(v & 0xff);
  b.push_back((v >> 8) & 0xff);
  b.push_back((v >> 16) & 0xff);
  b.push_back((v >> 24) & 0xff);
}

void put_u16(std::vector<std::uint8_t>& b, std::uint16_t v) {
  b.push_back(v & 0xff);
  b.push_back((v >> 8) & 0xff);
}

void put_tag(std::vector<std::uint8_t>& b, const char* tag) {
  b.insert(b.end(), tag, tag + 4);
}

}  // namespace

void write_wav24(const std::string& path, const std::vector<double>& samples,
                 double sample_rate) {
  const std::uint32_t data_bytes =
      static_cast<std::uint32_t>(samples.size() * 3);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);

  put_tag(out, "RIFF");
  put_u32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, 1);  // PCM
  put_u16(out, 1);  // mono
  const auto rate = static_cast<std::uint32_t>(std::lround(sample_rate));
  put_u32(out, rate);
  put_u32(out, rate * 3);
  put_u16(out, 3);   // block align
  put_u16(out, 24);  // bits per sample
  put_tag(out, "data");
  put_u32(out, data_bytes);

  constexpr double kFull = 8388608.0;  // 2^23
  for (double s : samples) {
    auto v = static_cast<std::int64_t>(std::llround(s * kFull));
    if (v > 8388607) v = 8388607;
    if (v < -8388608) v = -8388608;
    auto u = static_cast<std::uint32_t>(v & 0xffffff);
    out.push_back(u & 0xff);
    out.push_back((u >> 8) & 0xff);
    out.push_back((u >> 16) & 0xff);
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open for writing: " + path);
  f.write(reinterpret_cast<const char*>(out.data()),
          static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("write failed: " + path);
}

WavData read_wav(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for reading: " + path);
  std::vector<std::uint8_t> raw((std::istreambuf_iterator<char>(f)),
                                std::istreambuf_iterator<char>());
  if (raw.size() < 44 || std::memcmp(raw.data(), "RIFF", 4) != 0 ||
      std::memcmp(raw.data() + 8, "WAVE", 4) != 0)
    throw FormatError("not a RIFF/WAVE file: " + path, 0);

  auto u16 = [&](std::size_t o) {
    return static_cast<std::uint32_t>(raw[o]) | (raw[o + 1] << 8);
  };
  auto u32 = [&](std::size_t o) {
    return static_cast<std::uint32_t>(raw[o]) | (raw[o + 1] << 8) |
           (raw[o + 2] << 16) | (static_cast<std::uint32_t>(raw[o + 3]) << 24);
  };

  WavData wav;
  std::size_t pos = 12;
  int channels = 0;
  std::size_t data_off = 0, data_len = 0;
  while (pos + 8 <= raw.size()) {
    const char* tag = reinterpret_cast<const char*>(raw.data() + pos);
    std::uint32_t len = u32(pos + 4);
    if (std::memcmp(tag, "fmt ", 4) == 0 && pos + 8 + 16 <= raw.size()) {
      channels = static_cast<int>(u16(pos + 10));
      wav.sample_rate = static_cast<double>(u32(pos + 12));
      wav.bits_per_sample = static_cast<int>(u16(pos + 22));
    } else if (std::memcmp(tag, "data", 4) == 0) {
      data_off = pos + 8;
      data_len = len;
    }
    pos += 8 + len + (len & 1);
  }
  if (channels != 1)
    throw FormatError("only mono WAV is supported: " + path, 0);
  if (data_off == 0 || data_off + data_len > raw.size())
    throw FormatError("missing or truncated data chunk: " + path, 0);

  if (wav.bits_per_sample == 24) {
    wav.samples.resize(data_len / 3);
    for (std::size_t i = 0; i < wav.samples.size(); ++i) {
      std::size_t o = data_off + 3 * i;
      std::int32_t v = raw[o] | (raw[o + 1] << 8) | (raw[o + 2] << 16);
      if (v & 0x800000) v -= 0x1000000;
      wav.samples[i] = static_cast<double>(v) / 8388608.0;
    }
  } else if (wav.bits_per_sample == 16) {
    wav.samples.resize(data_len / 2);
    for (std::size_t i = 0; i < wav.samples.size(); ++i) {
      std::size_t o = data_off + 2 * i;
      std::int32_t v = raw[o] | (raw[o + 1] << 8);
      if (v & 0x8000) v -= 0x10000;
      wav.samples[i] = static_cast<double>(v) / 32768.0;
    }
  } else {
    throw FormatError("unsupported bit depth in " + path, 0);
  }
  return wav;
}

}  // namespace pitchbench
