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
  \file gradient_check.hpp
  \brief Central finite-difference verification of tape gradients

  The relative error of an element is |a - n| / max(|a|, |n|, 1e-8) for the
  analytic gradient `a` and the numeric estimate `n`. When a perturbation
  flips a ReLU activation pattern the difference quotient straddles a kink
  and says nothing about the derivative, so such elements are skipped and
  counted separately.
*/

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "ops.hpp"

namespace mgvga
{

struct gradient_check_entry
{
  std::string name;
  double max_rel_error{ 0.0 };
  double max_abs_error{ 0.0 };
  std::size_t checked{ 0 };
  std::size_t skipped_kinks{ 0 };
  bool nonfinite{ false };
};

struct gradient_check_report
{
  std::vector<gradient_check_entry> entries;

  double max_rel_error() const
  {
    double m = 0.0;
    for ( auto const& e : entries )
    {
      m = std::max( m, e.max_rel_error );
    }
    return m;
  }

  bool any_nonfinite() const
  {
    return std::any_of( entries.begin(), entries.end(), []( auto const& e ) { return e.nonfinite; } );
  }

  std::size_t checked() const
  {
    std::size_t n = 0;
    for ( auto const& e : entries )
    {
      n += e.checked;
    }
    return n;
  }

  bool passed( double tolerance ) const { return !any_nonfinite() && max_rel_error() < tolerance; }
};

inline double relative_error( double a, double b )
{
  return std::abs( a - b ) / std::max( { std::abs( a ), std::abs( b ), 1e-8 } );
}

/*!
  \brief Compares analytic and central-difference gradients.

  `fn` builds a 1x1 scalar on the tape it receives and must be deterministic.
  Every element of every tensor in `params` is perturbed by +/- `eps`.
*/
template<class T, class Fn>
gradient_check_report gradient_check( Fn&& fn, std::vector<tensor<T>*> const& params, T eps = T( 1e-5 ) )
{
  for ( auto* p : params )
  {
    p->zero_grad();
  }
  std::uint64_t base_kinks = 0;
  {
    tape<T> t;
    var<T> out = fn( t );
    base_kinks = t.kink_signature();
    t.backward( out );
  }
  auto evaluate = [&]( std::uint64_t& kinks ) {
    tape<T> t;
    var<T> out = fn( t );
    kinks = t.kink_signature();
    return out.scalar();
  };

  gradient_check_report report;
  for ( auto* p : params )
  {
    gradient_check_entry e;
    e.name = p->name;
    const matrix<T> analytic = p->grad_buffer();
    for ( Eigen::Index i = 0; i < p->value.size(); ++i )
    {
      const T saved = p->value.data()[i];
      std::uint64_t k_plus = 0, k_minus = 0;
      p->value.data()[i] = saved + eps;
      const T f_plus = evaluate( k_plus );
      p->value.data()[i] = saved - eps;
      const T f_minus = evaluate( k_minus );
      p->value.data()[i] = saved;

      const double a = static_cast<double>( analytic.data()[i] );
      const double n = ( static_cast<double>( f_plus ) - static_cast<double>( f_minus ) ) / ( 2.0 * static_cast<double>( eps ) );
      if ( !std::isfinite( a ) || !std::isfinite( n ) )
      {
        e.nonfinite = true;
        continue;
      }
      if ( k_plus != base_kinks || k_minus != base_kinks )
      {
        ++e.skipped_kinks;
        continue;
      }
      ++e.checked;
      e.max_rel_error = std::max( e.max_rel_error, relative_error( a, n ) );
      e.max_abs_error = std::max( e.max_abs_error, std::abs( a - n ) );
    }
    report.entries.push_back( std::move( e ) );
  }
  return report;
}

} // namespace mgvga
