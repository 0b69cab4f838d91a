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
  \file random_aig.hpp
  \brief Seeded random combinational AIGs

  Gates are AND with probability 0.7 and NOT otherwise. An AND picks two
  distinct earlier non-PO nodes. A NOT only inverts a PI or AND that has
  not been inverted yet, so no NOT chains or duplicate inverters appear and
  the graph survives an AIGER round trip unchanged up to renumbering.
  Every node without fan-out drives a fresh PO.
*/

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "aig_graph.hpp"
#include "../util/random.hpp"

namespace mgvga
{

inline aig_graph random_aig( std::uint32_t num_pi, std::uint32_t num_gates, std::uint64_t seed, double and_probability = 0.7 )
{
  if ( num_pi < 1 )
  {
    throw std::invalid_argument( "random_aig: need at least one PI" );
  }
  rng r( seed );
  aig_graph g;
  g.name = "random_" + std::to_string( num_pi ) + "_" + std::to_string( num_gates ) + "_" + std::to_string( seed );
  std::vector<node_id> pool;       /* nodes usable as fan-in */
  std::vector<node_id> invertible; /* PIs and ANDs without a NOT yet */
  for ( std::uint32_t i = 0; i < num_pi; ++i )
  {
    const auto p = g.add_pi();
    pool.push_back( p );
    invertible.push_back( p );
  }
  for ( std::uint32_t k = 0; k < num_gates; ++k )
  {
    bool make_and = r.bernoulli( and_probability );
    if ( make_and && pool.size() < 2 )
    {
      make_and = false;
    }
    if ( !make_and && invertible.empty() )
    {
      make_and = true;
    }
    if ( make_and )
    {
      const auto picks = r.sample_without_replacement( static_cast<std::uint32_t>( pool.size() ), 2 );
      const auto v = g.add_node( node_type::and_gate );
      g.add_edge( pool[picks[0]], v );
      g.add_edge( pool[picks[1]], v );
      pool.push_back( v );
      invertible.push_back( v );
    }
    else
    {
      const auto idx = static_cast<std::size_t>( r.below( invertible.size() ) );
      const auto src = invertible[idx];
      invertible[idx] = invertible.back();
      invertible.pop_back();
      const auto v = g.add_node( node_type::not_gate );
      g.add_edge( src, v );
      pool.push_back( v );
    }
  }
  std::vector<char> has_fanout( g.size(), 0 );
  for ( auto const& e : g.edges )
  {
    has_fanout[e.src] = 1;
  }
  const auto n = static_cast<node_id>( g.size() );
  for ( node_id v = 0; v < n; ++v )
  {
    if ( !has_fanout[v] )
    {
      g.add_po( v );
    }
  }
  return g;
}

} // namespace mgvga
