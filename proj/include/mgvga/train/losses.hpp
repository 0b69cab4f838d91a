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
  \file losses.hpp
  \brief Reconstruction losses over masked nodes
*/

#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "../diff/ops.hpp"

namespace mgvga
{

class loss_error : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

/*! \brief L_type = -(1/N_m) sum_{i masked} log Z~[i, y_i], log floored at 1e-12. */
template<class T>
var<T> loss_type( var<T> probs, std::vector<std::uint32_t> const& labels, std::vector<std::uint32_t> const& masked )
{
  if ( masked.empty() )
  {
    throw loss_error( "loss_type: empty masked set" );
  }
  return cross_entropy_rows( probs, labels, masked );
}

/*! \brief L_degree = (1/N_m) sum_{i masked} (D-_i - D^-_i)^2 + (D+_i - D^+_i)^2. */
template<class T>
var<T> loss_degree( var<T> predicted, matrix<T> const& target, std::vector<std::uint32_t> const& masked )
{
  if ( masked.empty() )
  {
    throw loss_error( "loss_degree: empty masked set" );
  }
  if ( predicted.cols() != 2 )
  {
    throw shape_error( "loss_degree: predictions must have two columns, got " + shape_string( predicted.value() ) );
  }
  return squared_error( predicted, target, masked );
}

/*! \brief Number of masked rows whose argmax matches the label. */
template<class T>
std::size_t count_correct_types( matrix<T> const& probs, std::vector<std::uint32_t> const& labels, std::vector<std::uint32_t> const& rows )
{
  std::size_t n = 0;
  for ( auto r : rows )
  {
    Eigen::Index best;
    probs.row( r ).maxCoeff( &best );
    n += static_cast<std::uint32_t>( best ) == labels[r];
  }
  return n;
}

} // namespace mgvga
