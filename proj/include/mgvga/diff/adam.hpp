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
  \file adam.hpp
  \brief Adam with decoupled weight decay and a linear learning-rate schedule
*/

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "tensor.hpp"

namespace mgvga
{

struct adam_config
{
  double lr{ 1e-3 };
  double beta1{ 0.9 };
  double beta2{ 0.999 };
  double eps{ 1e-8 };
  double weight_decay{ 0.01 };
};

template<class T>
struct adam_state
{
  std::uint64_t t{ 0 };
  std::vector<matrix<T>> m;
  std::vector<matrix<T>> v;

  bool operator==( adam_state const& o ) const
  {
    if ( t != o.t || m.size() != o.m.size() || v.size() != o.v.size() )
    {
      return false;
    }
    for ( std::size_t i = 0; i < m.size(); ++i )
    {
      if ( m[i] != o.m[i] || v[i] != o.v[i] )
      {
        return false;
      }
    }
    return true;
  }
};

/*! \brief lr(t) = lr0 * max(0, 1 - t / total). */
inline double linear_schedule( double lr0, std::uint64_t t, std::uint64_t total )
{
  if ( total == 0 )
  {
    return lr0;
  }
  return lr0 * std::max( 0.0, 1.0 - static_cast<double>( t ) / static_cast<double>( total ) );
}

/*!
  \brief One Adam update of every tensor using its `grad` buffer.

  Weight decay is decoupled: p <- p - lr * (m_hat / (sqrt(v_hat) + eps) + wd * p).
  `lr` overrides `cfg.lr` when non-negative (used by the schedule).
*/
template<class T>
void adam_step( parameter_set<T>& params, adam_state<T>& state, adam_config const& cfg, double lr = -1.0 )
{
  if ( state.m.empty() )
  {
    for ( std::size_t i = 0; i < params.size(); ++i )
    {
      state.m.push_back( matrix<T>::Zero( params[i].value.rows(), params[i].value.cols() ) );
      state.v.push_back( matrix<T>::Zero( params[i].value.rows(), params[i].value.cols() ) );
    }
  }
  if ( state.m.size() != params.size() )
  {
    throw std::invalid_argument( "adam_step: state does not match the parameter set" );
  }
  const double step_lr = lr >= 0.0 ? lr : cfg.lr;
  ++state.t;
  const double bc1 = 1.0 - std::pow( cfg.beta1, static_cast<double>( state.t ) );
  const double bc2 = 1.0 - std::pow( cfg.beta2, static_cast<double>( state.t ) );
  const T b1 = static_cast<T>( cfg.beta1 ), b2 = static_cast<T>( cfg.beta2 );
  for ( std::size_t i = 0; i < params.size(); ++i )
  {
    auto& p = params[i];
    if ( !p.requires_grad )
    {
      continue;
    }
    auto const& g = p.grad_buffer();
    auto& m = state.m[i];
    auto& v = state.v[i];
    if ( m.rows() != g.rows() || m.cols() != g.cols() )
    {
      throw std::invalid_argument( "adam_step: moment shape mismatch for '" + p.name + "'" );
    }
    m = b1 * m + ( T( 1 ) - b1 ) * g;
    v = b2 * v + ( T( 1 ) - b2 ) * g.cwiseProduct( g );
    const T a = static_cast<T>( step_lr / bc1 );
    const T inv_bc2 = static_cast<T>( 1.0 / bc2 );
    const T eps = static_cast<T>( cfg.eps );
    const T wd = static_cast<T>( step_lr * cfg.weight_decay );
    p.value.array() -= a * m.array() / ( ( v.array() * inv_bc2 ).sqrt() + eps ) + wd * p.value.array();
  }
}

} // namespace mgvga
