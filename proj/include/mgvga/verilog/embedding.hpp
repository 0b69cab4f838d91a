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
  \file embedding.hpp
  \brief Token embeddings, the offline hash embedder and adaptive pooling
*/

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tokenizer.hpp"
#include "../diff/tensor.hpp"
#include "../util/hash.hpp"
#include "../util/random.hpp"

namespace mgvga
{

struct token_embeddings
{
  matrix<float> values; /* T x d_v */
  std::string provider;
  std::string model;

  Eigen::Index num_tokens() const { return values.rows(); }
  Eigen::Index dim() const { return values.cols(); }
};

/*!
  \brief Deterministic content-hash embedding of every token.

  Token text is hashed with FNV-1a (mixed with `seed`), then each coordinate
  j is splitmix64(h + j * golden) mapped to [-1, 1]. Rows depend only on the
  token text, never on the corpus or position.
*/
inline token_embeddings embed_local( std::string_view source, std::uint32_t d_v = 256, std::uint64_t seed = 0 )
{
  const auto tokens = tokenize_verilog( source );
  token_embeddings e;
  e.provider = "local";
  e.model = "fnv1a-splitmix64";
  e.values.resize( static_cast<Eigen::Index>( tokens.size() ), static_cast<Eigen::Index>( d_v ) );
  for ( std::size_t r = 0; r < tokens.size(); ++r )
  {
    const auto h = fnv1a64( tokens[r] ) ^ splitmix64( seed );
    for ( std::uint32_t j = 0; j < d_v; ++j )
    {
      const auto x = splitmix64( h + 0x9e3779b97f4a7c15ull * ( j + 1 ) );
      const double u = static_cast<double>( x >> 11 ) * 0x1.0p-53;
      e.values( static_cast<Eigen::Index>( r ), static_cast<Eigen::Index>( j ) ) = static_cast<float>( 2.0 * u - 1.0 );
    }
  }
  return e;
}

/*! \brief Token range [begin, end) of pooling segment i. */
inline std::pair<Eigen::Index, Eigen::Index> pool_segment( Eigen::Index i, Eigen::Index tokens, Eigen::Index m )
{
  const auto begin = ( i * tokens ) / m;
  const auto end = ( ( i + 1 ) * tokens + m - 1 ) / m;
  return { begin, end };
}

/*!
  \brief X_V: M segment means over the token rows.

  Segment i covers rows [floor(i T / M), ceil((i + 1) T / M)). Segments may
  overlap by one row when M does not divide T, and repeat rows when T < M.
*/
template<class T = float, class Derived>
matrix<T> adaptive_pool( Eigen::MatrixBase<Derived> const& tokens, Eigen::Index m )
{
  const auto t = tokens.rows();
  if ( t < 1 )
  {
    throw std::invalid_argument( "adaptive_pool: no token embeddings to pool" );
  }
  if ( m < 1 )
  {
    throw std::invalid_argument( "adaptive_pool: M must be positive" );
  }
  matrix<T> out( m, tokens.cols() );
  for ( Eigen::Index i = 0; i < m; ++i )
  {
    const auto [b, e] = pool_segment( i, t, m );
    out.row( i ) = ( tokens.middleRows( b, e - b ).template cast<double>().colwise().sum() / static_cast<double>( e - b ) ).template cast<T>();
  }
  return out;
}

inline matrix<float> adaptive_pool( token_embeddings const& e, Eigen::Index m = 16 )
{
  return adaptive_pool<float>( e.values, m );
}

} // namespace mgvga
