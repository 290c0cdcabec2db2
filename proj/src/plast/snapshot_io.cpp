// SPDX-License-Identifier: Apache-2.0
#include "mtpgd/plast/snapshot_io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace mtpgd::plast {

namespace {

constexpr char kMagic[4] = {'M', 'T', 'P', 'S'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in, const std::string& path) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw IoError("snapshot file truncated: " + path);
  return v;
}

}  // namespace

void save_snapshot(const HistorySnapshot& snap, const std::string& path,
                   std::uint32_t chunk_cols) {
  if (chunk_cols == 0) throw ArgumentError("save_snapshot: chunk_cols == 0");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write snapshot: " + path);
  out.write(kMagic, 4);
  put(out, kVersion);
  put(out, static_cast<std::uint64_t>(snap.m.rows));
  put(out, static_cast<std::uint64_t>(snap.m.cols));
  put(out, static_cast<std::uint32_t>(HistorySnapshot::kComponents));
  put(out, chunk_cols);
  std::vector<double> buf;
  for (std::size_t c0 = 0; c0 < snap.m.cols; c0 += chunk_cols) {
    const std::size_t w = std::min<std::size_t>(chunk_cols, snap.m.cols - c0);
    buf.resize(snap.m.rows * w);
    for (std::size_t r = 0; r < snap.m.rows; ++r)
      std::memcpy(buf.data() + r * w, snap.m.row(r) + c0, w * sizeof(double));
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(double)));
  }
  if (!out) throw IoError("snapshot write failed: " + path);
}

HistorySnapshot load_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open snapshot: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw IoError("not a snapshot file: " + path);
  const auto version = get<std::uint32_t>(in, path);
  if (version != kVersion)
    throw IoError("unsupported snapshot version in " + path);
  const auto rows = get<std::uint64_t>(in, path);
  const auto cols = get<std::uint64_t>(in, path);
  const auto ncomp = get<std::uint32_t>(in, path);
  const auto chunk_cols = get<std::uint32_t>(in, path);
  if (ncomp != HistorySnapshot::kComponents || rows % ncomp != 0 ||
      chunk_cols == 0)
    throw IoError("bad snapshot header in " + path);
  HistorySnapshot snap;
  snap.n_points = rows / ncomp;
  snap.m = RowMatrix(rows, cols);
  std::vector<double> buf;
  for (std::size_t c0 = 0; c0 < cols; c0 += chunk_cols) {
    const std::size_t w = std::min<std::size_t>(chunk_cols, cols - c0);
    buf.resize(rows * w);
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(double)));
    if (!in) throw IoError("snapshot file truncated: " + path);
    for (std::uint64_t r = 0; r < rows; ++r)
      std::memcpy(snap.m.row(r) + c0, buf.data() + r * w, w * sizeof(double));
  }
  return snap;
}

void export_snapshot_csv(const HistorySnapshot& snap, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write csv: " + path);
  out.precision(17);
  out << "row";
  for (std::size_t c = 0; c < snap.m.cols; ++c) out << ",t" << c;
  out << "\n";
  for (std::size_t r = 0; r < snap.m.rows; ++r) {
    out << r;
    for (std::size_t c = 0; c < snap.m.cols; ++c) out << "," << snap.m(r, c);
    out << "\n";
  }
  if (!out) throw IoError("csv write failed: " + path);
}

void save_state_csv(const PlasticState& state, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write state: " + path);
  out.precision(17);
  out << "p11,p22,p33,p12,ebar\n";
  for (std::size_t i = 0; i < state.size(); ++i)
    out << state.p11[i] << "," << state.p22[i] << "," << state.p33[i] << ","
        << state.p12[i] << "," << state.ebar[i] << "\n";
  if (!out) throw IoError("state write failed: " + path);
}

PlasticState load_state_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open state: " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("p11,", 0) != 0)
    throw IoError("bad state header in " + path);
  PlasticState s;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    double v[5];
    char comma;
    if (!(row >> v[0] >> comma >> v[1] >> comma >> v[2] >> comma >> v[3] >>
          comma >> v[4]))
      throw IoError("bad state line in " + path);
    s.p11.push_back(v[0]);
    s.p22.push_back(v[1]);
    s.p33.push_back(v[2]);
    s.p12.push_back(v[3]);
    s.ebar.push_back(v[4]);
  }
  return s;
}

}  // namespace mtpgd::plast
