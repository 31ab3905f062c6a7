// AVX2 row kernel. Built with -mavx2 and only called after a runtime CPU
// check; must produce exactly the bytes step_row_scalar produces.

#include <immintrin.h>

#include "avalanche/lattice/counter_rng.hpp"
#include "avalanche/lattice/step.hpp"

namespace avalanche::lattice {

namespace {

inline __m256i fmix32_x8(__m256i h) {
    h = _mm256_xor_si256(h, _mm256_srli_epi32(h, 16));
    h = _mm256_mullo_epi32(h, _mm256_set1_epi32(static_cast<int>(0x85EBCA6Bu)));
    h = _mm256_xor_si256(h, _mm256_srli_epi32(h, 13));
    h = _mm256_mullo_epi32(h, _mm256_set1_epi32(static_cast<int>(0xC2B2AE35u)));
    return _mm256_xor_si256(h, _mm256_srli_epi32(h, 16));
}

inline __m128i load8(const std::uint8_t* p) {
    return _mm_loadl_epi64(reinterpret_cast<const __m128i*>(p));
}

}  // namespace

void step_row_avx2(const RowJob& job) noexcept {
    const StepTables& t = *job.tables;
    const int m = job.side;

    const __m256i one = _mm256_set1_epi32(1);
    const __m256i two = _mm256_set1_epi32(2);
    const __m256i deplete = _mm256_set1_epi32(t.deplete);
    const __m256i leave = _mm256_set1_epi32(t.leave);
    const __m256i row_mix = _mm256_set1_epi32(static_cast<int>(job.row_hash ^ job.col_key));
    const __m256i col_mul = _mm256_set1_epi32(static_cast<int>(kColMul));
    const __m256i lane = _mm256_setr_epi32(0, 1, 2, 3, 4, 5, 6, 7);

    int c = job.first_col;
    for (; c + 8 <= m; c += 8) {
        // Neighbour count: bytes never exceed 8, so epi8 adds cannot overflow.
        __m128i k8 = _mm_add_epi8(load8(job.above + c), load8(job.above + c + 1));
        k8 = _mm_add_epi8(k8, load8(job.above + c + 2));
        k8 = _mm_add_epi8(k8, load8(job.here + c));
        k8 = _mm_add_epi8(k8, load8(job.here + c + 2));
        k8 = _mm_add_epi8(k8, load8(job.below + c));
        k8 = _mm_add_epi8(k8, load8(job.below + c + 1));
        k8 = _mm_add_epi8(k8, load8(job.below + c + 2));
        const __m256i k = _mm256_cvtepu8_epi32(k8);
        const __m256i state = _mm256_cvtepu8_epi32(load8(job.src + c));

        const __m256i cols = _mm256_add_epi32(_mm256_set1_epi32(c), lane);
        const __m256i h = fmix32_x8(_mm256_xor_si256(row_mix, _mm256_mullo_epi32(cols, col_mul)));
        const __m256i u = _mm256_srli_epi32(h, 32 - kUniformBits);

        const __m256i infect = _mm256_i32gather_epi32(t.infect.data(), k, 4);
        // S: 1 + [u < infect[k]]
        const __m256i next_s = _mm256_sub_epi32(one, _mm256_cmpgt_epi32(infect, u));
        // I: 2 - [u < leave] - [u < deplete]; deplete <= leave
        const __m256i next_i = _mm256_add_epi32(
            _mm256_add_epi32(two, _mm256_cmpgt_epi32(leave, u)), _mm256_cmpgt_epi32(deplete, u));

        const __m256i is_s = _mm256_cmpeq_epi32(state, one);
        const __m256i is_i = _mm256_cmpeq_epi32(state, two);
        const __m256i next =
            _mm256_or_si256(_mm256_and_si256(is_s, next_s), _mm256_and_si256(is_i, next_i));

        const __m256i p16 = _mm256_packus_epi32(next, next);
        const __m256i p8 = _mm256_packus_epi16(p16, p16);
        const int lo = _mm_cvtsi128_si32(_mm256_castsi256_si128(p8));
        const int hi = _mm_cvtsi128_si32(_mm256_extracti128_si256(p8, 1));
        __builtin_memcpy(job.dst + c, &lo, 4);
        __builtin_memcpy(job.dst + c + 4, &hi, 4);
    }

    if (c < m) {
        RowJob tail = job;
        tail.first_col = c;
        step_row_scalar(tail);
    }
}

}  // namespace avalanche::lattice
