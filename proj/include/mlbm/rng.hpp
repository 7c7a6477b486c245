#pragma once

#include <cstdint>
#include <random>

namespace mlbm {

// Portable draws on top of mt19937_64. The std distributions are
// implementation-defined, so they are avoided wherever reproducibility
// across toolchains matters.
class Rng {
public:
	explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
		std::seed_seq seq{
			static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
			static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
		engine_.seed(seq);
	}

	// Uniform in [0, 1) with 53 random bits.
	double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

	bool bernoulli(double p) { return uniform() < p; }

	// Uniform integer in [0, n), Lemire's nearly-divisionless rejection.
	std::uint64_t below(std::uint64_t n) {
		unsigned __int128 m = static_cast<unsigned __int128>(engine_()) * n;
		auto low = static_cast<std::uint64_t>(m);
		if (low < n) {
			const std::uint64_t threshold = -n % n;
			while (low < threshold) {
				m = static_cast<unsigned __int128>(engine_()) * n;
				low = static_cast<std::uint64_t>(m);
			}
		}
		return static_cast<std::uint64_t>(m >> 64);
	}

private:
	std::mt19937_64 engine_;
};

} // namespace mlbm
