// Copyright 2026 The stemsep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace stemsep {

// Planar stereo buffer; samples are double in [-1, 1] by convention
// (files are decoded to float and widened).
struct StereoWave {
  std::vector<double> left;
  std::vector<double> right;
  int sample_rate = 44100;

  StereoWave() = default;
  StereoWave(int64_t n, int sr) : left(n, 0.0), right(n, 0.0), sample_rate(sr) {}

  int64_t length() const { return static_cast<int64_t>(left.size()); }
  const std::vector<double>& channel(int c) const { return c == 0 ? left : right; }
  std::vector<double>& channel(int c) { return c == 0 ? left : right; }
};

struct WavInfo {
  int64_t frames = 0;
  int channels = 0;
  int sample_rate = 0;
  int bits = 0;
  bool is_float = false;
};

// RIFF/WAVE: PCM 16/24-bit and IEEE float32, stereo or mono (mono is
// duplicated to both channels).
WavInfo read_wav_info(const std::string& path);
StereoWave read_wav(const std::string& path);

// Reads frames [start, start+count); out-of-range regions are zero.
StereoWave read_wav_range(const std::string& path, int64_t start, int64_t count);

// 32-bit float stereo.
void write_wav(const std::string& path, const StereoWave& wave);

}  // namespace stemsep
