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
  \file toy_rewrite.hpp
  \brief Offline stand-in for the synthesis transforms

  Every transform first folds NOT chains into complemented literals and
  rebuilds the network with constant propagation, duplicated-input collapse
  and structural hashing, then sweeps logic with no path to an output.
  `refactor` adds absorption (a & (a & b) = a & b, a & (!a & b) = 0),
  `resub` additionally detects contradictions between two AND operands, and
  the `-z` variants rebuild in a seeded random topological order. `balance`
  re-associates single-fanout AND trees by level. Only `balance` may grow
  the AND count.
*/

#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <queue>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "sequences.hpp"
#include "../aig/literal_network.hpp"

namespace mgvga
{

namespace detail
{

struct rebuild_options
{
  bool absorb{ false };
  bool contradict{ false };
  bool shuffle{ false };
  std::uint64_t seed{ 0 };
};

inline literal_network copy_inputs( literal_network const& net, std::vector<literal>& map )
{
  literal_network out;
  map.assign( net.num_vars(), literal_false );
  for ( std::size_t i = 0; i < net.num_pis(); ++i )
  {
    map[i + 1] = out.create_pi( net.pi_names()[i] );
  }
  return out;
}

inline literal translate( std::vector<literal> const& map, literal l )
{
  return map[literal_var( l )] ^ ( l & 1u );
}

inline literal absorbing_and( literal_network& out, literal a, literal b, bool contradict )
{
  auto fanins = [&]( literal l, literal& x, literal& y ) {
    if ( literal_complemented( l ) || !out.is_and_var( literal_var( l ) ) )
    {
      return false;
    }
    auto const& d = out.and_of_var( literal_var( l ) );
    x = d.a;
    y = d.b;
    return true;
  };
  literal x, y;
  for ( int side = 0; side < 2; ++side )
  {
    const auto inner = side == 0 ? a : b;
    const auto other = side == 0 ? b : a;
    if ( fanins( inner, x, y ) )
    {
      if ( other == x || other == y )
      {
        return inner;
      }
      if ( other == literal_negate( x ) || other == literal_negate( y ) )
      {
        return literal_false;
      }
    }
  }
  if ( contradict )
  {
    literal u, v;
    if ( fanins( a, x, y ) && fanins( b, u, v ) )
    {
      if ( x == literal_negate( u ) || x == literal_negate( v ) || y == literal_negate( u ) || y == literal_negate( v ) )
      {
        return literal_false;
      }
    }
  }
  return out.create_and_hashed( a, b );
}

/*! \brief AND indices in topological order; a seeded random one when `shuffle`. */
inline std::vector<std::size_t> and_order( literal_network const& net, bool shuffle, std::uint64_t seed )
{
  const auto n = net.num_ands();
  std::vector<std::size_t> order;
  order.reserve( n );
  if ( !shuffle )
  {
    for ( std::size_t k = 0; k < n; ++k )
    {
      order.push_back( k );
    }
    return order;
  }
  const auto first_and = 1 + net.num_pis();
  std::vector<std::uint32_t> pending( n, 0 );
  std::vector<std::vector<std::size_t>> users( n );
  for ( std::size_t k = 0; k < n; ++k )
  {
    for ( auto l : { net.ands()[k].a, net.ands()[k].b } )
    {
      const auto v = literal_var( l );
      if ( v >= first_and )
      {
        ++pending[k];
        users[v - first_and].push_back( k );
      }
    }
  }
  rng r( seed );
  std::vector<std::size_t> ready;
  for ( std::size_t k = 0; k < n; ++k )
  {
    if ( pending[k] == 0 )
    {
      ready.push_back( k );
    }
  }
  while ( !ready.empty() )
  {
    const auto pick = r.below( ready.size() );
    const auto k = ready[pick];
    ready[pick] = ready.back();
    ready.pop_back();
    order.push_back( k );
    for ( auto u : users[k] )
    {
      if ( --pending[u] == 0 )
      {
        ready.push_back( u );
      }
    }
  }
  return order;
}

/*! \brief Drops AND gates with no path to an output. */
inline literal_network sweep( literal_network const& net )
{
  const auto first_and = 1 + net.num_pis();
  std::vector<char> live( net.num_vars(), 0 );
  for ( auto o : net.outputs() )
  {
    live[literal_var( o )] = 1;
  }
  for ( std::size_t k = net.num_ands(); k-- > 0; )
  {
    if ( live[first_and + k] )
    {
      live[literal_var( net.ands()[k].a )] = 1;
      live[literal_var( net.ands()[k].b )] = 1;
    }
  }
  std::vector<literal> map;
  auto out = copy_inputs( net, map );
  for ( std::size_t k = 0; k < net.num_ands(); ++k )
  {
    if ( live[first_and + k] )
    {
      map[first_and + k] = out.create_and( translate( map, net.ands()[k].a ), translate( map, net.ands()[k].b ) );
    }
  }
  for ( std::size_t i = 0; i < net.num_pos(); ++i )
  {
    out.create_po( translate( map, net.outputs()[i] ), net.po_names()[i] );
  }
  return out;
}

inline literal_network rebuild( literal_network const& net, rebuild_options const& o )
{
  const auto first_and = 1 + net.num_pis();
  std::vector<literal> map;
  auto out = copy_inputs( net, map );
  for ( auto k : and_order( net, o.shuffle, o.seed ) )
  {
    const auto a = translate( map, net.ands()[k].a );
    const auto b = translate( map, net.ands()[k].b );
    map[first_and + k] = o.absorb ? absorbing_and( out, a, b, o.contradict ) : out.create_and_hashed( a, b );
  }
  for ( std::size_t i = 0; i < net.num_pos(); ++i )
  {
    out.create_po( translate( map, net.outputs()[i] ), net.po_names()[i] );
  }
  return sweep( out );
}

inline literal_network balance( literal_network const& net )
{
  const auto first_and = 1 + net.num_pis();
  std::vector<std::uint32_t> refs( net.num_vars(), 0 );
  for ( auto const& d : net.ands() )
  {
    ++refs[literal_var( d.a )];
    ++refs[literal_var( d.b )];
  }
  for ( auto o : net.outputs() )
  {
    ++refs[literal_var( o )];
  }

  std::vector<literal> map;
  auto out = copy_inputs( net, map );
  std::vector<char> done( net.num_vars(), 0 );
  for ( std::size_t v = 0; v < first_and; ++v )
  {
    done[v] = 1;
  }
  std::vector<std::uint32_t> level( out.num_vars(), 0 );
  auto level_of = [&]( literal l ) { return level[literal_var( l )]; };

  std::function<void( std::uint32_t )> build = [&]( std::uint32_t v ) {
    if ( done[v] )
    {
      return;
    }
    // leaves of the single-fanout, uncomplemented AND tree rooted at v
    std::vector<literal> leaves;
    std::vector<literal> stack{ net.ands()[v - first_and].a, net.ands()[v - first_and].b };
    while ( !stack.empty() )
    {
      const auto l = stack.back();
      stack.pop_back();
      const auto u = literal_var( l );
      if ( !literal_complemented( l ) && u >= first_and && refs[u] == 1 )
      {
        stack.push_back( net.ands()[u - first_and].a );
        stack.push_back( net.ands()[u - first_and].b );
      }
      else
      {
        leaves.push_back( l );
      }
    }
    for ( auto l : leaves )
    {
      build( literal_var( l ) );
    }
    using item = std::pair<std::uint32_t, literal>;
    std::priority_queue<item, std::vector<item>, std::greater<item>> q;
    for ( auto l : leaves )
    {
      const auto t = translate( map, l );
      q.emplace( level_of( t ), t );
    }
    while ( q.size() > 1 )
    {
      const auto [la, a] = q.top();
      q.pop();
      const auto [lb, b] = q.top();
      q.pop();
      const auto vars_before = out.num_vars();
      const auto c = out.create_and_hashed( a, b );
      if ( out.num_vars() > vars_before )
      {
        level.push_back( std::max( la, lb ) + 1 );
      }
      q.emplace( level_of( c ), c );
    }
    map[v] = q.top().second;
    done[v] = 1;
  };
  for ( auto o : net.outputs() )
  {
    build( literal_var( o ) );
  }
  for ( std::size_t i = 0; i < net.num_pos(); ++i )
  {
    out.create_po( translate( map, net.outputs()[i] ), net.po_names()[i] );
  }
  return sweep( out );
}

inline literal_network toy_transform( literal_network const& net, std::string_view transform, std::uint64_t seed )
{
  if ( transform == "balance" )
  {
    return balance( rebuild( net, {} ) );
  }
  rebuild_options o;
  o.shuffle = transform.size() > 3 && transform.substr( transform.size() - 3 ) == " -z";
  o.seed = seed;
  const auto base = o.shuffle ? transform.substr( 0, transform.size() - 3 ) : transform;
  if ( base == "rewrite" )
  {
  }
  else if ( base == "refactor" )
  {
    o.absorb = true;
  }
  else if ( base == "resub" )
  {
    o.absorb = true;
    o.contradict = true;
  }
  else
  {
    throw std::invalid_argument( "unknown transform '" + std::string( transform ) + "'" );
  }
  return rebuild( net, o );
}

} // namespace detail

/*! \brief Applies one transform of the vocabulary; the result is functionally equivalent. */
inline aig_graph toy_rewrite( aig_graph const& g, std::string_view transform, std::uint64_t seed )
{
  if ( !is_transform( transform ) )
  {
    throw std::invalid_argument( "unknown transform '" + std::string( transform ) + "'" );
  }
  return detail::toy_transform( network_from_graph( g ), transform, seed ).to_graph( g.name );
}

/*! \brief Applies a whole sequence; `on_step(k, graph)` sees the graph after step k. */
inline aig_graph toy_synthesize( aig_graph const& g, opt_sequence const& seq, std::uint64_t seed,
                                 std::function<void( std::size_t, aig_graph const& )> const& on_step = {} )
{
  auto net = network_from_graph( g );
  for ( std::size_t k = 0; k < seq.steps.size(); ++k )
  {
    if ( !is_transform( seq.steps[k] ) )
    {
      throw std::invalid_argument( "unknown transform '" + seq.steps[k] + "'" );
    }
    net = detail::toy_transform( net, seq.steps[k], derive_seed( seed, k ) );
    if ( on_step )
    {
      on_step( k, net.to_graph( g.name ) );
    }
  }
  return net.to_graph( g.name );
}

} // namespace mgvga
