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
  \file augment.hpp
  \brief Buffer insertion: equivalence-preserving single-input AND gates
*/

#pragma once

#include <cstdint>
#include <stdexcept>

#include "aig_graph.hpp"
#include "../util/random.hpp"

namespace mgvga
{

/*!
  \brief Splits randomly chosen edges with buffer AND nodes.

  Every edge whose target is not a PO is selected independently with
  probability `p`. A selected edge (u, v) becomes (u, b), (b, v) where `b`
  is a new AND whose single input carries multiplicity 2. The new nodes are
  appended, so existing node ids stay valid.
*/
inline aig_graph insert_buffers( aig_graph const& g, double p, std::uint64_t seed )
{
  if ( !( p >= 0.0 && p <= 1.0 ) )
  {
    throw std::invalid_argument( "insert_buffers: probability must lie in [0, 1]" );
  }
  if ( g.has_masked() )
  {
    throw graph_error( "insert_buffers: graph contains MASKED nodes" );
  }
  aig_graph out = g;
  out.edges.clear();
  out.edges.reserve( g.edges.size() );
  rng r( seed );
  for ( auto const& e : g.edges )
  {
    if ( e.dst < g.size() && g.types[e.dst] != node_type::po && r.bernoulli( p ) )
    {
      const auto b = out.add_node( node_type::and_gate );
      out.add_edge( e.src, b, 2 );
      out.add_edge( b, e.dst, e.multiplicity );
    }
    else
    {
      out.edges.push_back( e );
    }
  }
  return out;
}

/*! \brief Number of edges eligible for buffering (targets that are not POs). */
inline std::size_t num_bufferable_edges( aig_graph const& g )
{
  std::size_t n = 0;
  for ( auto const& e : g.edges )
  {
    n += e.dst < g.size() && g.types[e.dst] != node_type::po;
  }
  return n;
}

} // namespace mgvga
