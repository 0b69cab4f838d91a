/*
 * Copyright 2026 The mgvga Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/*!
  \file random.hpp
  \brief Seeded, platform-stable random number helpers

  The standard distributions are implementation-defined, so everything
  that must be reproducible draws from the raw 64-bit engine output.
*/

#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace mgvga
{

inline std::uint64_t splitmix64( std::uint64_t x )
{
  x += 0x9e3779b97f4a7c15ull;
  x = ( x ^ ( x >> 30 ) ) * 0xbf58476d1ce4e5b9ull;
  x = ( x ^ ( x >> 27 ) ) * 0x94d049bb133111ebull;
  return x ^ ( x >> 31 );
}

/*! \brief Derives an independent stream seed from a base seed and indices. */
inline std::uint64_t derive_seed( std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0 )
{
  auto s = splitmix64( seed );
  s = splitmix64( s ^ ( a + 0x632be59bd9b4e019ull ) );
  s = splitmix64( s ^ ( b + 0x85157af5ull ) );
  return splitmix64( s ^ ( c + 0x2545f4914f6cdd1dull ) );
}

class rng
{
public:
  explicit rng( std::uint64_t seed ) : engine_( seed ) {}

  std::uint64_t next() { return engine_(); }

  /* uniform in [0, 1) with 53 bits */
  double uniform() { return static_cast<double>( engine_() >> 11 ) * 0x1.0p-53; }

  double uniform( double lo, double hi ) { return lo + ( hi - lo ) * uniform(); }

  /* uniform in [0, n); n > 0 */
  std::uint64_t below( std::uint64_t n )
  {
    // Lemire's rejection keeps this unbiased and portable
    const std::uint64_t threshold = ( -n ) % n;
    while ( true )
    {
      const auto x = engine_();
      const auto m = static_cast<unsigned __int128>( x ) * n;
      if ( static_cast<std::uint64_t>( m ) >= threshold )
      {
        return static_cast<std::uint64_t>( m >> 64 );
      }
    }
  }

  bool bernoulli( double p ) { return uniform() < p; }

  template<class It>
  void shuffle( It first, It last )
  {
    const auto n = static_cast<std::uint64_t>( last - first );
    for ( std::uint64_t i = n; i > 1; --i )
    {
      std::iter_swap( first + ( i - 1 ), first + below( i ) );
    }
  }

  /*! \brief k distinct indices from [0, n), in draw order. */
  std::vector<std::uint32_t> sample_without_replacement( std::uint32_t n, std::uint32_t k )
  {
    std::vector<std::uint32_t> idx( n );
    std::iota( idx.begin(), idx.end(), 0u );
    for ( std::uint32_t i = 0; i < k; ++i )
    {
      std::swap( idx[i], idx[i + below( n - i )] );
    }
    idx.resize( k );
    return idx;
  }

private:
  std::mt19937_64 engine_;
};

} // namespace mgvga
