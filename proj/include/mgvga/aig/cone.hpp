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
  \file cone.hpp
  \brief Transitive fan-in cone extraction
*/

#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "aig_graph.hpp"

namespace mgvga
{

struct cone
{
  node_id root{ 0 };
  /*! \brief Transitive fan-in of `root`, inclusive, sorted by id. */
  std::vector<node_id> members;
  /*! \brief Cone as a standalone graph with `root` as its only PO. */
  aig_graph extracted;
  /*! \brief Original node id for every PI of `extracted`, in PI order. */
  std::vector<node_id> pi_origin;
  /*! \brief Original node id for every node of `extracted` (the added PO maps to `root`). */
  std::vector<node_id> node_origin;
};

/*!
  \brief Extracts the cone rooted at `root`.

  Cone PIs keep the relative order of the original `pis` list. When `root`
  is itself a PO the copied PO becomes the sole output; otherwise a new PO
  driven by `root` is added.
*/
inline cone extract_cone( aig_graph const& g, node_id root )
{
  if ( root >= g.size() )
  {
    throw graph_error( "extract_cone: unknown node id " + std::to_string( root ) );
  }
  adjacency adj( g );
  std::vector<char> in_cone( g.size(), 0 );
  std::vector<node_id> stack{ root };
  in_cone[root] = 1;
  while ( !stack.empty() )
  {
    const auto v = stack.back();
    stack.pop_back();
    for ( auto const& f : adj.fanins( v ) )
    {
      if ( !in_cone[f.node] )
      {
        in_cone[f.node] = 1;
        stack.push_back( f.node );
      }
    }
  }

  cone c;
  c.root = root;
  for ( node_id v = 0; v < g.size(); ++v )
  {
    if ( in_cone[v] )
    {
      c.members.push_back( v );
    }
  }

  constexpr node_id unmapped = ~node_id{ 0 };
  std::vector<node_id> map( g.size(), unmapped );
  auto& x = c.extracted;
  x.name = g.name.empty() ? "cone_" + std::to_string( root ) : g.name + "_cone_" + std::to_string( root );

  const bool named = !g.pi_names.empty();
  for ( std::size_t i = 0; i < g.pis.size(); ++i )
  {
    const auto p = g.pis[i];
    if ( in_cone[p] )
    {
      map[p] = x.add_node( node_type::pi );
      x.pis.push_back( map[p] );
      if ( named )
      {
        x.pi_names.push_back( g.pi_names[i] );
      }
      c.pi_origin.push_back( p );
      c.node_origin.push_back( p );
    }
  }
  for ( auto v : c.members )
  {
    if ( map[v] == unmapped )
    {
      map[v] = x.add_node( g.types[v] );
      c.node_origin.push_back( v );
      if ( const auto cv = g.constant_value( v ) )
      {
        x.constants.emplace_back( map[v], *cv );
      }
    }
  }
  for ( auto const& e : g.edges )
  {
    if ( e.dst < g.size() && in_cone[e.dst] )
    {
      x.add_edge( map[e.src], map[e.dst], e.multiplicity );
    }
  }
  if ( g.types[root] == node_type::po )
  {
    x.pos.push_back( map[root] );
    for ( std::size_t i = 0; i < g.pos.size() && i < g.po_names.size(); ++i )
    {
      if ( g.pos[i] == root )
      {
        x.po_names.push_back( g.po_names[i] );
      }
    }
  }
  else
  {
    x.add_po( map[root] );
    c.node_origin.push_back( root );
  }
  return c;
}

} // namespace mgvga
