#include "bsfr/rng.hpp"

#include <boost/random/uniform_01.hpp>
#include <boost/random/uniform_int_distribution.hpp>

namespace bsfr {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_key(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x6A09E667F3BCC908ULL;
  for (std::uint64_t p : parts) {
    h = splitmix64(h ^ splitmix64(p));
  }
  return h;
}

std::uint64_t stream_key(StreamTag tag, std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = stream_key({static_cast<std::uint64_t>(tag)});
  for (std::uint64_t p : parts) {
    h = splitmix64(h ^ splitmix64(p));
  }
  return h;
}

namespace {

std::seed_seq make_seed_seq(std::uint64_t seed, std::uint64_t stream_id) {
  const std::uint64_t a = splitmix64(seed);
  const std::uint64_t b = splitmix64(stream_id ^ 0xD1B54A32D192ED03ULL);
  return std::seed_seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                       static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
  auto seq = make_seed_seq(seed, stream_id);
  engine_.seed(seq);
}

double RngStream::normal() { return normal_(engine_); }

double RngStream::uniform() { return boost::random::uniform_01<double>()(engine_); }

std::uint64_t RngStream::below(std::uint64_t n) {
  boost::random::uniform_int_distribution<std::uint64_t> dist(0, n - 1);
  return dist(engine_);
}

void RngStream::fill_normal(Eigen::Ref<Eigen::VectorXd> out) {
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    out[i] = normal_(engine_);
  }
}

}  // namespace bsfr
