// SPDX-License-Identifier: Apache-2.0
#include "mtpgd/sep/field_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "mtpgd/common.hpp"

namespace mtpgd::sep {

namespace {

constexpr char kMagic[4] = {'M', 'T', 'P', 'F'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in, const std::string& path) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw IoError("field file truncated: " + path);
  return v;
}

void put_vec(std::ofstream& out, const Eigen::VectorXd& v) {
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

Eigen::VectorXd get_vec(std::ifstream& in, Eigen::Index n,
                        const std::string& path) {
  Eigen::VectorXd v(n);
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw IoError("field file truncated: " + path);
  return v;
}

}  // namespace

void save_field(const std::string& path, const SeparatedField& field) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write field: " + path);
  out.write(kMagic, 4);
  put(out, kVersion);
  put(out, static_cast<std::uint64_t>(field.n_rows()));
  put(out, static_cast<std::uint32_t>(field.n_micro));
  put(out, static_cast<std::uint32_t>(field.n_macro));
  put(out, static_cast<std::uint32_t>(field.rank()));
  for (int k = 0; k < field.rank(); ++k) {
    put_vec(out, field.spatial[k]);
    put_vec(out, field.micro[k]);
    put_vec(out, field.macro[k]);
  }
  if (!out) throw IoError("field write failed: " + path);
}

SeparatedField load_field(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open field: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw IoError("not a separated-field file: " + path);
  if (get<std::uint32_t>(in, path) != kVersion)
    throw IoError("unsupported field version in " + path);
  const auto rows = get<std::uint64_t>(in, path);
  const auto n_micro = get<std::uint32_t>(in, path);
  const auto n_macro = get<std::uint32_t>(in, path);
  const auto rank = get<std::uint32_t>(in, path);
  if (n_micro == 0 || n_macro == 0)
    throw IoError("bad field header in " + path);
  SeparatedField field(static_cast<int>(n_micro), static_cast<int>(n_macro));
  for (std::uint32_t k = 0; k < rank; ++k) {
    Eigen::VectorXd x = get_vec(in, static_cast<Eigen::Index>(rows), path);
    Eigen::VectorXd tau = get_vec(in, n_micro, path);
    Eigen::VectorXd T = get_vec(in, n_macro, path);
    field.append_mode_raw(std::move(x), std::move(tau), std::move(T));
  }
  return field;
}

}  // namespace mtpgd::sep
