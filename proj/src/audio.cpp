// Copyright 2026 The stemsep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "stemsep/audio.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace stemsep {

namespace {

struct FmtChunk {
  uint16_t format = 0;
  uint16_t channels = 0;
  uint32_t sample_rate = 0;
  uint16_t bits = 0;
};

struct WavLayout {
  FmtChunk fmt;
  int64_t data_offset = 0;
  int64_t data_bytes = 0;
};

uint32_t read_u32(std::istream& f) {
  unsigned char b[4];
  f.read(reinterpret_cast<char*>(b), 4);
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

uint16_t read_u16(std::istream& f) {
  unsigned char b[2];
  f.read(reinterpret_cast<char*>(b), 2);
  return static_cast<uint16_t>(b[0] | (b[1] << 8));
}

WavLayout parse_wav(std::ifstream& f, const std::string& path) {
  char tag[4];
  f.read(tag, 4);
  if (!f || std::memcmp(tag, "RIFF", 4) != 0)
    throw std::runtime_error("not a RIFF file: " + path);
  read_u32(f);  // riff size
  f.read(tag, 4);
  if (!f || std::memcmp(tag, "WAVE", 4) != 0)
    throw std::runtime_error("not a WAVE file: " + path);

  WavLayout lay;
  bool have_fmt = false;
  while (f.read(tag, 4)) {
    uint32_t chunk_size = read_u32(f);
    if (!f) break;
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      lay.fmt.format = read_u16(f);
      lay.fmt.channels = read_u16(f);
      lay.fmt.sample_rate = read_u32(f);
      read_u32(f);  // byte rate
      read_u16(f);  // block align
      lay.fmt.bits = read_u16(f);
      if (chunk_size > 16) f.seekg(chunk_size - 16, std::ios::cur);
      have_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      lay.data_offset = f.tellg();
      lay.data_bytes = chunk_size;
      f.seekg(chunk_size + (chunk_size & 1), std::ios::cur);
    } else {
      f.seekg(chunk_size + (chunk_size & 1), std::ios::cur);
    }
  }
  f.clear();
  if (!have_fmt) throw std::runtime_error("missing fmt chunk: " + path);
  if (lay.data_offset == 0) throw std::runtime_error("missing data chunk: " + path);

  const bool pcm = lay.fmt.format == 1 && (lay.fmt.bits == 16 || lay.fmt.bits == 24);
  const bool ieee = lay.fmt.format == 3 && lay.fmt.bits == 32;
  if (!pcm && !ieee)
    throw std::runtime_error("unsupported WAV encoding (want PCM16/24 or float32): " + path);
  if (lay.fmt.channels != 1 && lay.fmt.channels != 2)
    throw std::runtime_error("unsupported channel count: " + path);
  return lay;
}

double decode_sample(const unsigned char* p, int bits, bool is_float) {
  if (is_float) {
    float v;
    std::memcpy(&v, p, 4);
    return static_cast<double>(v);
  }
  if (bits == 16) {
    int16_t v = static_cast<int16_t>(p[0] | (p[1] << 8));
    return static_cast<double>(v) / 32768.0;
  }
  // 24-bit
  int32_t v = static_cast<int32_t>(p[0] | (p[1] << 8) | (p[2] << 16));
  if (v & 0x800000) v |= static_cast<int32_t>(0xff000000);
  return static_cast<double>(v) / 8388608.0;
}

}  // namespace

WavInfo read_wav_info(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open wav file: " + path);
  WavLayout lay = parse_wav(f, path);
  const int bytes_per = lay.fmt.bits / 8;
  WavInfo info;
  info.channels = lay.fmt.channels;
  info.sample_rate = static_cast<int>(lay.fmt.sample_rate);
  info.bits = lay.fmt.bits;
  info.is_float = lay.fmt.format == 3;
  info.frames = lay.data_bytes / (bytes_per * lay.fmt.channels);
  return info;
}

StereoWave read_wav_range(const std::string& path, int64_t start, int64_t count) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open wav file: " + path);
  WavLayout lay = parse_wav(f, path);
  const int bytes_per = lay.fmt.bits / 8;
  const int frame_bytes = bytes_per * lay.fmt.channels;
  const int64_t total = lay.data_bytes / frame_bytes;

  StereoWave wave(count, static_cast<int>(lay.fmt.sample_rate));
  if (start < 0) throw std::runtime_error("negative read offset: " + path);
  const int64_t first = std::min(start, total);
  const int64_t avail = std::min(count, total - first);
  if (avail <= 0) return wave;

  f.seekg(lay.data_offset + first * frame_bytes);
  std::vector<unsigned char> buf(static_cast<size_t>(avail) * frame_bytes);
  f.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!f) throw std::runtime_error("short read: " + path);

  const bool is_float = lay.fmt.format == 3;
  for (int64_t i = 0; i < avail; ++i) {
    const unsigned char* p = buf.data() + i * frame_bytes;
    double l = decode_sample(p, lay.fmt.bits, is_float);
    double r = lay.fmt.channels == 2 ? decode_sample(p + bytes_per, lay.fmt.bits, is_float) : l;
    wave.left[static_cast<size_t>(i)] = l;
    wave.right[static_cast<size_t>(i)] = r;
  }
  return wave;
}

StereoWave read_wav(const std::string& path) {
  WavInfo info = read_wav_info(path);
  return read_wav_range(path, 0, info.frames);
}

void write_wav(const std::string& path, const StereoWave& wave) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot create wav file: " + path);

  const uint32_t frames = static_cast<uint32_t>(wave.length());
  const uint32_t data_bytes = frames * 2 * 4;
  auto put_u32 = [&](uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    f.write(reinterpret_cast<char*>(b), 4);
  };
  auto put_u16 = [&](uint16_t v) {
    unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
    f.write(reinterpret_cast<char*>(b), 2);
  };

  f.write("RIFF", 4);
  put_u32(36 + data_bytes);
  f.write("WAVE", 4);
  f.write("fmt ", 4);
  put_u32(16);
  put_u16(3);  // IEEE float
  put_u16(2);
  put_u32(static_cast<uint32_t>(wave.sample_rate));
  put_u32(static_cast<uint32_t>(wave.sample_rate) * 2 * 4);
  put_u16(8);
  put_u16(32);
  f.write("data", 4);
  put_u32(data_bytes);

  std::vector<float> inter(static_cast<size_t>(frames) * 2);
  for (uint32_t i = 0; i < frames; ++i) {
    inter[2 * i] = static_cast<float>(wave.left[i]);
    inter[2 * i + 1] = static_cast<float>(wave.right[i]);
  }
  f.write(reinterpret_cast<const char*>(inter.data()),
          static_cast<std::streamsize>(inter.size() * sizeof(float)));
  if (!f) throw std::runtime_error("short write: " + path);
}

}  // namespace stemsep
