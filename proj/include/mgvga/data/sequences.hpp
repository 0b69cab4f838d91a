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
  \file sequences.hpp
  \brief Optimization sequences over the seven-transform vocabulary
*/

#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "../util/random.hpp"

namespace mgvga
{

inline constexpr std::array<std::string_view, 7> transform_vocabulary{ "rewrite",    "resub",    "refactor", "rewrite -z",
                                                                        "resub -z",   "refactor -z", "balance" };

inline bool is_transform( std::string_view name )
{
  return std::find( transform_vocabulary.begin(), transform_vocabulary.end(), name ) != transform_vocabulary.end();
}

struct opt_sequence
{
  std::uint32_t id{ 0 };
  std::vector<std::string> steps;

  bool operator==( opt_sequence const& ) const = default;
};

/*! \brief `n` i.i.d. uniform sequences of `length` transforms. */
inline std::vector<opt_sequence> sample_sequences( std::size_t n, std::size_t length, std::uint64_t seed )
{
  if ( n == 0 )
  {
    throw std::invalid_argument( "sample_sequences: n must be at least 1" );
  }
  rng r( seed );
  std::vector<opt_sequence> out( n );
  for ( std::size_t i = 0; i < n; ++i )
  {
    out[i].id = static_cast<std::uint32_t>( i );
    out[i].steps.reserve( length );
    for ( std::size_t k = 0; k < length; ++k )
    {
      out[i].steps.emplace_back( transform_vocabulary[r.below( transform_vocabulary.size() )] );
    }
  }
  return out;
}

/*! \brief "rewrite; balance; ..." as accepted by ABC. */
inline std::string to_script( opt_sequence const& s )
{
  std::string out;
  for ( std::size_t i = 0; i < s.steps.size(); ++i )
  {
    out += ( i ? "; " : "" ) + s.steps[i];
  }
  return out;
}

inline opt_sequence sequence_from_script( std::string_view script, std::uint32_t id = 0 )
{
  opt_sequence s;
  s.id = id;
  std::size_t pos = 0;
  while ( pos <= script.size() )
  {
    auto end = script.find( ';', pos );
    if ( end == std::string_view::npos )
    {
      end = script.size();
    }
    auto step = script.substr( pos, end - pos );
    while ( !step.empty() && std::isspace( static_cast<unsigned char>( step.front() ) ) )
    {
      step.remove_prefix( 1 );
    }
    while ( !step.empty() && std::isspace( static_cast<unsigned char>( step.back() ) ) )
    {
      step.remove_suffix( 1 );
    }
    if ( !step.empty() )
    {
      if ( !is_transform( step ) )
      {
        throw std::invalid_argument( "unknown transform '" + std::string( step ) + "'" );
      }
      s.steps.emplace_back( step );
    }
    pos = end + 1;
  }
  return s;
}

} // namespace mgvga
