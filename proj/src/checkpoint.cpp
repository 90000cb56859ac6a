#include "velab/checkpoint.hpp"

#include <cstdint>
#include <fstream>
#include <stdexcept>

namespace velab {

namespace {

void write_u32(std::ofstream& out, std::uint32_t v) {
  unsigned char buf[4];
  for (int k = 0; k < 4; ++k) buf[k] = static_cast<unsigned char>((v >> (8 * k)) & 0xff);
  out.write(reinterpret_cast<const char*>(buf), 4);
}

void write_u64(std::ofstream& out, std::uint64_t v) {
  unsigned char buf[8];
  for (int k = 0; k < 8; ++k) buf[k] = static_cast<unsigned char>((v >> (8 * k)) & 0xff);
  out.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint32_t read_u32(std::ifstream& in) {
  unsigned char buf[4];
  in.read(reinterpret_cast<char*>(buf), 4);
  std::uint32_t v = 0;
  for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(buf[k]) << (8 * k);
  return v;
}

std::uint64_t read_u64(std::ifstream& in) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), 8);
  std::uint64_t v = 0;
  for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(buf[k]) << (8 * k);
  return v;
}

void write_matrix(std::ofstream& out, const Eigen::MatrixXd& mat) {
  for (Eigen::Index r = 0; r < mat.rows(); ++r) {
    for (Eigen::Index c = 0; c < mat.cols(); ++c) {
      const double v = mat(r, c);
      out.write(reinterpret_cast<const char*>(&v), sizeof(double));
    }
  }
}

void read_matrix(std::ifstream& in, Eigen::MatrixXd& mat) {
  for (Eigen::Index r = 0; r < mat.rows(); ++r) {
    for (Eigen::Index c = 0; c < mat.cols(); ++c) {
      double v = 0.0;
      in.read(reinterpret_cast<char*>(&v), sizeof(double));
      mat(r, c) = v;
    }
  }
}

}  // namespace

void save_checkpoint(const ScoreNet& net, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("save_checkpoint: cannot open " + path);
  }
  write_u32(out, static_cast<std::uint32_t>(net.data_dim));
  write_u32(out, static_cast<std::uint32_t>(net.width));
  write_u32(out, static_cast<std::uint32_t>(net.depth));
  write_u64(out, net.seed);
  write_matrix(out, net.input_layer);
  for (const auto& w : net.hidden) write_matrix(out, w);
  write_matrix(out, net.output_layer);
  if (!out) {
    throw std::runtime_error("save_checkpoint: write failed for " + path);
  }
}

ScoreNet load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("load_checkpoint: cannot open " + path);
  }
  ScoreNet net;
  net.data_dim = static_cast<int>(read_u32(in));
  net.width = static_cast<int>(read_u32(in));
  net.depth = static_cast<int>(read_u32(in));
  net.seed = read_u64(in);
  if (!in || net.data_dim < 1 || net.width < 1 || net.depth < 0) {
    throw std::runtime_error("load_checkpoint: corrupt header in " + path);
  }
  net.input_layer.resize(net.width, net.data_dim + 1);
  read_matrix(in, net.input_layer);
  net.hidden.resize(static_cast<std::size_t>(net.depth));
  for (auto& w : net.hidden) {
    w.resize(net.width, net.width);
    read_matrix(in, w);
  }
  net.output_layer.resize(net.data_dim, net.width);
  read_matrix(in, net.output_layer);
  if (!in) {
    throw std::runtime_error("load_checkpoint: truncated file " + path);
  }
  // Exactly one payload is allowed; trailing bytes signal a layout mismatch.
  in.peek();
  if (!in.eof()) {
    throw std::runtime_error("load_checkpoint: trailing bytes in " + path);
  }
  return net;
}

}  // namespace velab
