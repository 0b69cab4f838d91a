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
  \file isomorphism.hpp
  \brief Structural isomorphism of AIGs with fixed terminal order

  Every node gets a structural label computed bottom-up (PI index, constant
  value, gate type plus the sorted labels of its fan-ins with multiplicity).
  Two graphs are isomorphic when their node label multisets and edge label
  multisets coincide and their PO lists carry the same labels in order.
*/

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <tuple>
#include <vector>

#include "aig_graph.hpp"

namespace mgvga
{

class structural_labeler
{
public:
  /*! \brief Returns one label per node, or an empty vector for cyclic graphs. */
  std::vector<std::uint32_t> label( aig_graph const& g )
  {
    const auto order = topological_order( g );
    if ( !order )
    {
      return {};
    }
    adjacency adj( g );
    std::vector<std::uint32_t> lab( g.size(), 0 );
    std::vector<std::int64_t> pi_index( g.size(), -1 );
    std::vector<std::int64_t> const_value( g.size(), -1 );
    for ( std::size_t i = 0; i < g.pis.size(); ++i )
    {
      pi_index[g.pis[i]] = static_cast<std::int64_t>( i );
    }
    for ( auto const& [c, v] : g.constants )
    {
      const_value[c] = v ? 1 : 0;
    }
    std::vector<std::int64_t> po_index( g.size(), -1 );
    for ( std::size_t i = 0; i < g.pos.size(); ++i )
    {
      po_index[g.pos[i]] = static_cast<std::int64_t>( i );
    }

    for ( auto v : *order )
    {
      std::vector<std::int64_t> key{ static_cast<std::int64_t>( g.types[v] ) };
      if ( g.types[v] == node_type::pi )
      {
        key.push_back( pi_index[v] );
        key.push_back( const_value[v] );
      }
      if ( g.types[v] == node_type::po )
      {
        key.push_back( po_index[v] );
      }
      std::vector<std::pair<std::uint32_t, std::uint8_t>> fi;
      for ( auto const& f : adj.fanins( v ) )
      {
        fi.emplace_back( lab[f.node], f.multiplicity );
      }
      std::sort( fi.begin(), fi.end() );
      for ( auto const& [l, m] : fi )
      {
        key.push_back( l );
        key.push_back( m );
      }
      lab[v] = intern( key );
    }
    return lab;
  }

private:
  std::uint32_t intern( std::vector<std::int64_t> const& key )
  {
    const auto [it, inserted] = table_.emplace( key, static_cast<std::uint32_t>( table_.size() ) );
    return it->second;
  }

  std::map<std::vector<std::int64_t>, std::uint32_t> table_;
};

/*! \brief True when g1 and g2 are equal up to node renumbering. */
inline bool isomorphic( aig_graph const& g1, aig_graph const& g2 )
{
  if ( g1.size() != g2.size() || g1.edges.size() != g2.edges.size() || g1.pis.size() != g2.pis.size() ||
       g1.pos.size() != g2.pos.size() || g1.constants.size() != g2.constants.size() )
  {
    return false;
  }
  structural_labeler labeler;
  const auto l1 = labeler.label( g1 );
  const auto l2 = labeler.label( g2 );
  if ( l1.size() != g1.size() || l2.size() != g2.size() )
  {
    return false;
  }
  auto node_multiset = []( std::vector<std::uint32_t> l ) {
    std::sort( l.begin(), l.end() );
    return l;
  };
  if ( node_multiset( l1 ) != node_multiset( l2 ) )
  {
    return false;
  }
  auto edge_multiset = []( aig_graph const& g, std::vector<std::uint32_t> const& l ) {
    std::vector<std::tuple<std::uint32_t, std::uint32_t, std::uint8_t>> es;
    es.reserve( g.edges.size() );
    for ( auto const& e : g.edges )
    {
      es.emplace_back( l[e.src], l[e.dst], e.multiplicity );
    }
    std::sort( es.begin(), es.end() );
    return es;
  };
  if ( edge_multiset( g1, l1 ) != edge_multiset( g2, l2 ) )
  {
    return false;
  }
  for ( std::size_t i = 0; i < g1.pos.size(); ++i )
  {
    if ( l1[g1.pos[i]] != l2[g2.pos[i]] )
    {
      return false;
    }
  }
  return true;
}

} // namespace mgvga
