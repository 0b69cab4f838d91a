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
  \file synthesis.hpp
  \brief Boolean fences and exhaustive exact synthesis of small functions

  A fence (p_1, ..., p_l) places p_i AND nodes on level i. A node on level
  i takes both fan-ins from PIs (level 0) or lower levels, at least one of
  them from level i - 1, and either fan-in may be complemented. The output is
  the single node of the top level, optionally complemented.

  Truth tables are bit vectors over the 2^n input assignments: bit a is the
  value under assignment a, where PI i reads bit i of a.
*/

#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "../aig/literal_network.hpp"

namespace mgvga
{

class exact_error : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr std::uint32_t max_exact_inputs = 3;

struct fence
{
  std::vector<std::uint32_t> parts;

  std::uint32_t nodes() const
  {
    std::uint32_t n = 0;
    for ( auto p : parts )
    {
      n += p;
    }
    return n;
  }
  std::uint32_t levels() const { return static_cast<std::uint32_t>( parts.size() ); }

  std::string to_string() const
  {
    std::string s = "(";
    for ( std::size_t i = 0; i < parts.size(); ++i )
    {
      s += ( i ? "," : "" ) + std::to_string( parts[i] );
    }
    return s + ")";
  }

  auto operator<=>( fence const& ) const = default;
};

/*! \brief All compositions of n into l positive parts, lexicographic; empty when n < l. */
inline std::vector<fence> enumerate_fences( std::uint32_t n, std::uint32_t l )
{
  std::vector<fence> out;
  if ( l == 0 || n < l )
  {
    return out;
  }
  std::vector<std::uint32_t> cur;
  auto rec = [&]( auto&& self, std::uint32_t left, std::uint32_t slots ) -> void {
    if ( slots == 1 )
    {
      cur.push_back( left );
      out.push_back( { cur } );
      cur.pop_back();
      return;
    }
    for ( std::uint32_t p = 1; p + ( slots - 1 ) <= left; ++p )
    {
      cur.push_back( p );
      self( self, left - p, slots - 1 );
      cur.pop_back();
    }
  };
  rec( rec, n, l );
  return out;
}

/*! \brief Every composition of n, lexicographic over the parts (deepest fence first). */
inline std::vector<fence> enumerate_all_fences( std::uint32_t n )
{
  std::vector<fence> out;
  std::vector<std::uint32_t> cur;
  auto rec = [&]( auto&& self, std::uint32_t left ) -> void {
    if ( left == 0 )
    {
      out.push_back( { cur } );
      return;
    }
    for ( std::uint32_t p = 1; p <= left; ++p )
    {
      cur.push_back( p );
      self( self, left - p );
      cur.pop_back();
    }
  };
  if ( n > 0 )
  {
    rec( rec, n );
  }
  return out;
}

/* ---- truth tables ---- */

inline std::uint32_t tt_mask( std::uint32_t num_inputs )
{
  const auto bits = 1u << num_inputs;
  return bits >= 32 ? 0xffffffffu : ( 1u << bits ) - 1u;
}

inline std::uint32_t tt_projection( std::uint32_t i, std::uint32_t num_inputs )
{
  std::uint32_t t = 0;
  for ( std::uint32_t a = 0; a < ( 1u << num_inputs ); ++a )
  {
    t |= ( ( a >> i ) & 1u ) << a;
  }
  return t;
}

inline bool tt_depends_on( std::uint32_t tt, std::uint32_t i, std::uint32_t num_inputs )
{
  for ( std::uint32_t a = 0; a < ( 1u << num_inputs ); ++a )
  {
    if ( ( ( tt >> a ) & 1u ) != ( ( tt >> ( a ^ ( 1u << i ) ) ) & 1u ) )
    {
      return true;
    }
  }
  return false;
}

/*! \brief True when the function is constant or ignores one of its inputs. */
inline bool tt_degenerate( std::uint32_t tt, std::uint32_t num_inputs )
{
  for ( std::uint32_t i = 0; i < num_inputs; ++i )
  {
    if ( !tt_depends_on( tt, i, num_inputs ) )
    {
      return true;
    }
  }
  return num_inputs == 0;
}

/*! \brief Functions that depend on every input, in increasing order (218 for three inputs). */
inline std::vector<std::uint32_t> nondegenerate_functions( std::uint32_t num_inputs )
{
  if ( num_inputs < 1 || num_inputs > max_exact_inputs )
  {
    throw exact_error( "nondegenerate_functions: 1 to 3 inputs supported" );
  }
  std::vector<std::uint32_t> out;
  for ( std::uint32_t t = 0; t <= tt_mask( num_inputs ); ++t )
  {
    if ( !tt_degenerate( t, num_inputs ) )
    {
      out.push_back( t );
    }
  }
  return out;
}

inline std::string tt_to_hex( std::uint32_t tt, std::uint32_t num_inputs )
{
  const auto digits = std::max( 1u, ( 1u << num_inputs ) / 4 );
  std::string s( digits, '0' );
  for ( std::uint32_t d = 0; d < digits; ++d )
  {
    s[digits - 1 - d] = "0123456789abcdef"[( tt >> ( 4 * d ) ) & 0xf];
  }
  return s;
}

/*! \brief Parses "96", "0x96" or "0X96"; the value must fit 2^num_inputs bits. */
inline std::uint32_t tt_from_hex( std::string_view hex, std::uint32_t num_inputs )
{
  if ( num_inputs < 1 || num_inputs > max_exact_inputs )
  {
    throw exact_error( "truth tables with 1 to 3 inputs are supported" );
  }
  if ( hex.size() > 2 && hex[0] == '0' && ( hex[1] == 'x' || hex[1] == 'X' ) )
  {
    hex.remove_prefix( 2 );
  }
  if ( hex.empty() || hex.size() > 8 )
  {
    throw exact_error( "malformed truth table '" + std::string( hex ) + "'" );
  }
  std::uint32_t v = 0;
  for ( char c : hex )
  {
    const auto d = std::string_view( "0123456789abcdef" ).find( static_cast<char>( std::tolower( static_cast<unsigned char>( c ) ) ) );
    if ( d == std::string_view::npos )
    {
      throw exact_error( "malformed truth table '" + std::string( hex ) + "'" );
    }
    v = ( v << 4 ) | static_cast<std::uint32_t>( d );
  }
  if ( v & ~tt_mask( num_inputs ) )
  {
    throw exact_error( "truth table '" + std::string( hex ) + "' has more than " + std::to_string( 1u << num_inputs ) + " bits" );
  }
  return v;
}

/* ---- NPN-lite: input permutation and output complement ---- */

struct npn_transform
{
  std::array<std::uint8_t, max_exact_inputs> perm{ 0, 1, 2 };
  bool output_complement{ false };
};

/*! \brief g(x) = c ^ f(y) with y[perm[i]] = x[i]. */
inline std::uint32_t npn_apply( std::uint32_t tt, std::uint32_t num_inputs, npn_transform const& t )
{
  std::uint32_t g = 0;
  for ( std::uint32_t x = 0; x < ( 1u << num_inputs ); ++x )
  {
    std::uint32_t y = 0;
    for ( std::uint32_t i = 0; i < num_inputs; ++i )
    {
      y |= ( ( x >> i ) & 1u ) << t.perm[i];
    }
    g |= ( ( ( tt >> y ) & 1u ) ^ ( t.output_complement ? 1u : 0u ) ) << x;
  }
  return g;
}

struct npn_class
{
  std::uint32_t representative;
  npn_transform transform; /* representative = npn_apply(f, n, transform) */
};

/*! \brief Smallest truth table reachable by permuting inputs and complementing the output. */
inline npn_class npn_canonize( std::uint32_t tt, std::uint32_t num_inputs )
{
  npn_transform t;
  std::array<std::uint8_t, max_exact_inputs> p{ 0, 1, 2 };
  npn_class best{ 0xffffffffu, {} };
  do
  {
    bool valid = true;
    for ( std::uint32_t i = 0; i < max_exact_inputs; ++i )
    {
      // positions past num_inputs stay fixed
      valid = valid && ( i < num_inputs ? p[i] < num_inputs : p[i] == i );
    }
    if ( !valid )
    {
      continue;
    }
    for ( bool c : { false, true } )
    {
      t.perm = p;
      t.output_complement = c;
      const auto g = npn_apply( tt, num_inputs, t );
      if ( g < best.representative )
      {
        best = { g, t };
      }
    }
  } while ( std::next_permutation( p.begin(), p.end() ) );
  return best;
}

/* ---- circuits ---- */

/*! \brief Signals 0..n-1 are the PIs, signal n + k is step k. */
struct exact_step
{
  std::uint32_t a{ 0 };
  std::uint32_t b{ 0 };
  bool ca{ false };
  bool cb{ false };
};

struct exact_circuit
{
  std::uint32_t num_inputs{ 0 };
  std::vector<exact_step> steps;
  std::uint32_t output{ 0 };
  bool output_complement{ false };

  std::uint32_t size() const { return static_cast<std::uint32_t>( steps.size() ); }

  /*! \brief Longest PI-to-output path in AND nodes. */
  std::uint32_t depth() const
  {
    std::vector<std::uint32_t> lv( num_inputs + steps.size(), 0 );
    for ( std::size_t k = 0; k < steps.size(); ++k )
    {
      lv[num_inputs + k] = 1 + std::max( lv[steps[k].a], lv[steps[k].b] );
    }
    return lv[output];
  }

  std::uint32_t simulate() const
  {
    const auto mask = tt_mask( num_inputs );
    std::vector<std::uint32_t> f( num_inputs + steps.size(), 0 );
    for ( std::uint32_t i = 0; i < num_inputs; ++i )
    {
      f[i] = tt_projection( i, num_inputs );
    }
    for ( std::size_t k = 0; k < steps.size(); ++k )
    {
      auto const& s = steps[k];
      f[num_inputs + k] = ( f[s.a] ^ ( s.ca ? mask : 0u ) ) & ( f[s.b] ^ ( s.cb ? mask : 0u ) );
    }
    return ( f[output] ^ ( output_complement ? mask : 0u ) ) & mask;
  }

  literal_network to_network( std::string const& po_name = "f" ) const
  {
    literal_network net;
    std::vector<literal> lit;
    for ( std::uint32_t i = 0; i < num_inputs; ++i )
    {
      lit.push_back( net.create_pi( "x" + std::to_string( i ) ) );
    }
    for ( auto const& s : steps )
    {
      lit.push_back( net.create_and( lit[s.a] ^ static_cast<literal>( s.ca ), lit[s.b] ^ static_cast<literal>( s.cb ) ) );
    }
    net.create_po( lit[output] ^ static_cast<literal>( output_complement ), po_name );
    return net;
  }

  aig_graph to_graph( std::string const& name = "exact" ) const { return to_network().to_graph( name ); }

  /*! \brief Rewires PIs and the output so that the circuit for npn_apply(f, t) computes f. */
  exact_circuit undo( npn_transform const& t ) const
  {
    exact_circuit c = *this;
    auto remap = [&]( std::uint32_t s ) { return s < num_inputs ? static_cast<std::uint32_t>( t.perm[s] ) : s; };
    for ( auto& s : c.steps )
    {
      s.a = remap( s.a );
      s.b = remap( s.b );
    }
    c.output = remap( c.output );
    c.output_complement ^= t.output_complement;
    return c;
  }
};

struct search_stats
{
  std::uint64_t fences_explored{ 0 };
  std::uint64_t candidates{ 0 }; /* complete topologies whose output function was compared */
  std::uint64_t micros{ 0 };
  bool fallback{ false };
};

struct exact_result
{
  bool feasible{ false };
  exact_circuit circuit;
  std::optional<fence> used_fence; /* empty for a bare (possibly complemented) PI */
  std::uint32_t representative{ 0 };
  search_stats stats;

  std::uint32_t size() const { return circuit.size(); }
  std::uint32_t levels() const { return used_fence ? used_fence->levels() : 0; }
};

namespace detail
{

/*! \brief Depth-first search for one fence. */
class fence_search
{
public:
  fence_search( std::uint32_t num_inputs, std::uint32_t target, fence const& f )
      : n_( num_inputs ), target_( target ), mask_( tt_mask( num_inputs ) ), fence_( f )
  {
    std::uint32_t first = num_inputs;
    for ( std::uint32_t i = 0; i < f.levels(); ++i )
    {
      for ( std::uint32_t k = 0; k < f.parts[i]; ++k )
      {
        level_.push_back( i + 1 );
        level_start_.push_back( first );
      }
      first += f.parts[i];
    }
    total_ = f.nodes();
    func_.assign( n_ + total_, 0 );
    uses_.assign( n_ + total_, 0 );
    key_.assign( total_, 0 );
    steps_.resize( total_ );
    for ( std::uint32_t i = 0; i < n_; ++i )
    {
      func_[i] = tt_projection( i, n_ );
      mark( func_[i], +1 );
    }
  }

  /*! \brief Returns a circuit realizing the target exactly with this fence. */
  std::optional<exact_circuit> run( std::uint64_t& candidates )
  {
    candidates_ = &candidates;
    // every node but the output needs a fan-out, so the top level holds one node
    if ( fence_.parts.back() != 1 )
    {
      return std::nullopt;
    }
    if ( dfs( 0, 0 ) )
    {
      exact_circuit c;
      c.num_inputs = n_;
      c.steps = steps_;
      c.output = n_ + total_ - 1;
      c.output_complement = out_complement_;
      return c;
    }
    return std::nullopt;
  }

private:
  void mark( std::uint32_t f, int d )
  {
    seen_[f & 0xff] = static_cast<std::uint8_t>( seen_[f & 0xff] + d );
  }

  /* first signal index of the level below node k's level */
  std::uint32_t prev_level_start( std::uint32_t k ) const
  {
    const auto lv = level_[k];
    if ( lv == 1 )
    {
      return 0;
    }
    std::uint32_t j = k;
    while ( level_[j] == lv )
    {
      --j;
    }
    return level_start_[j];
  }

  bool dfs( std::uint32_t k, std::uint32_t unused )
  {
    const auto self = n_ + k;
    const bool is_output = k + 1 == total_;
    const auto lo = prev_level_start( k ); /* b must sit on the previous level */
    const auto hi = level_start_[k];       /* exclusive */
    const bool same_level_prev = k > 0 && level_[k - 1] == level_[k];
    const std::uint32_t remaining = total_ - k - 1;
    for ( std::uint32_t b = lo; b < hi; ++b )
    {
      for ( std::uint32_t a = 0; a < b; ++a )
      {
        for ( std::uint32_t c = 0; c < 4; ++c )
        {
          const std::uint32_t key = ( b * ( n_ + total_ ) + a ) * 4 + c;
          if ( same_level_prev && key <= key_[k - 1] )
          {
            continue;
          }
          const bool ca = c & 2, cb = c & 1;
          const auto f = ( func_[a] ^ ( ca ? mask_ : 0u ) ) & ( func_[b] ^ ( cb ? mask_ : 0u ) );
          // fan-ins that were unused before this node
          const std::uint32_t freed = ( a >= n_ && uses_[a] == 0 ? 1 : 0 ) + ( b >= n_ && uses_[b] == 0 ? 1 : 0 );
          if ( is_output )
          {
            ++*candidates_;
            if ( unused != freed )
            {
              continue;
            }
            if ( f == target_ || f == ( target_ ^ mask_ ) )
            {
              steps_[k] = { a, b, ca, cb };
              out_complement_ = f != target_;
              return true;
            }
            continue;
          }
          if ( f == 0 || f == mask_ || seen_[f] || seen_[f ^ mask_] )
          {
            continue;
          }
          const auto now_unused = unused - freed + 1;
          if ( now_unused > 2 * remaining )
          {
            continue;
          }
          func_[self] = f;
          key_[k] = key;
          steps_[k] = { a, b, ca, cb };
          ++uses_[a];
          ++uses_[b];
          mark( f, +1 );
          const bool found = dfs( k + 1, now_unused );
          mark( f, -1 );
          --uses_[a];
          --uses_[b];
          if ( found )
          {
            return true;
          }
        }
      }
    }
    return false;
  }

  std::uint32_t n_;
  std::uint32_t target_;
  std::uint32_t mask_;
  fence fence_;
  std::uint32_t total_{ 0 };
  std::vector<std::uint32_t> level_;       /* per node */
  std::vector<std::uint32_t> level_start_; /* per node: first signal of its level */
  std::vector<std::uint32_t> func_;
  std::vector<std::uint32_t> uses_;
  std::vector<std::uint32_t> key_;
  std::vector<exact_step> steps_;
  std::array<std::uint8_t, 256> seen_{};
  bool out_complement_{ false };
  std::uint64_t* candidates_{ nullptr };
};

inline void check_target( std::uint32_t tt, std::uint32_t num_inputs )
{
  if ( num_inputs < 1 || num_inputs > max_exact_inputs )
  {
    throw exact_error( "exact synthesis supports 1 to 3 inputs, got " + std::to_string( num_inputs ) );
  }
  if ( tt & ~tt_mask( num_inputs ) )
  {
    throw exact_error( "truth table has bits beyond 2^" + std::to_string( num_inputs ) );
  }
  if ( tt == 0 || tt == tt_mask( num_inputs ) )
  {
    throw exact_error( "constant targets are not synthesized" );
  }
}

/*! \brief A bare PI or its complement. */
inline std::optional<exact_circuit> trivial_circuit( std::uint32_t tt, std::uint32_t num_inputs )
{
  for ( std::uint32_t i = 0; i < num_inputs; ++i )
  {
    const auto p = tt_projection( i, num_inputs );
    if ( tt == p || tt == ( p ^ tt_mask( num_inputs ) ) )
    {
      exact_circuit c;
      c.num_inputs = num_inputs;
      c.output = i;
      c.output_complement = tt != p;
      return c;
    }
  }
  return std::nullopt;
}

struct sweep_state
{
  std::set<fence> explored;
  search_stats stats;
};

/*! \brief Tries fences of sizes 1..max_nodes with at most max_levels levels, skipping explored ones. */
inline std::optional<std::pair<exact_circuit, fence>> sweep( std::uint32_t rep, std::uint32_t num_inputs, std::uint32_t max_nodes,
                                                              std::uint32_t max_levels, sweep_state& st )
{
  for ( std::uint32_t n = 1; n <= max_nodes; ++n )
  {
    for ( auto const& f : enumerate_all_fences( n ) )
    {
      if ( f.levels() > max_levels || !st.explored.insert( f ).second )
      {
        continue;
      }
      ++st.stats.fences_explored;
      fence_search s( num_inputs, rep, f );
      if ( auto c = s.run( st.stats.candidates ) )
      {
        return std::make_pair( *c, f );
      }
    }
  }
  return std::nullopt;
}

inline exact_result finish( std::uint32_t tt, std::uint32_t num_inputs, npn_class const& cls,
                            std::optional<std::pair<exact_circuit, fence>> found, search_stats stats,
                            std::chrono::steady_clock::time_point start )
{
  exact_result r;
  r.representative = cls.representative;
  r.stats = stats;
  if ( found )
  {
    r.feasible = true;
    r.circuit = found->first.undo( cls.transform );
    r.used_fence = found->second;
    if ( r.circuit.simulate() != tt )
    {
      throw std::logic_error( "exact synthesis produced a circuit for " + tt_to_hex( r.circuit.simulate(), num_inputs ) +
                              " instead of " + tt_to_hex( tt, num_inputs ) );
    }
  }
  r.stats.micros = static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::microseconds>( std::chrono::steady_clock::now() - start ).count() );
  return r;
}

} // namespace detail

inline constexpr std::uint32_t default_max_exact_nodes = 8;

/*!
  \brief Minimum-size AIG for a 1- to 3-input function.

  Without a constraint, fences are tried by increasing size and, within one
  size, in the lexicographic order of `enumerate_all_fences`; the first
  feasible one wins. With
  a constraint only that fence is searched and `feasible` may be false.
*/
inline exact_result exact_synthesize( std::uint32_t tt, std::uint32_t num_inputs, std::uint32_t max_nodes = default_max_exact_nodes,
                                      std::optional<fence> const& constraint = std::nullopt )
{
  const auto start = std::chrono::steady_clock::now();
  detail::check_target( tt, num_inputs );
  const auto cls = npn_canonize( tt, num_inputs );
  if ( auto c = detail::trivial_circuit( cls.representative, num_inputs ); c && !constraint )
  {
    auto r = detail::finish( tt, num_inputs, cls, std::make_pair( *c, fence{} ), {}, start );
    r.used_fence.reset();
    return r;
  }
  detail::sweep_state st;
  if ( constraint )
  {
    if ( constraint->parts.empty() || std::count( constraint->parts.begin(), constraint->parts.end(), 0u ) )
    {
      throw exact_error( "fence parts must be positive" );
    }
    ++st.stats.fences_explored;
    detail::fence_search s( num_inputs, cls.representative, *constraint );
    std::optional<std::pair<exact_circuit, fence>> found;
    if ( auto c = s.run( st.stats.candidates ) )
    {
      found = std::make_pair( *c, *constraint );
    }
    return detail::finish( tt, num_inputs, cls, found, st.stats, start );
  }
  auto found = detail::sweep( cls.representative, num_inputs, max_nodes, max_nodes, st );
  return detail::finish( tt, num_inputs, cls, found, st.stats, start );
}

struct search_bounds
{
  std::uint32_t nodes{ 0 };
  std::uint32_t levels{ 0 };
};

/*!
  \brief Exact synthesis restricted to fences within `bounds`.

  When nothing fits the bounds the search falls back to the unconstrained
  sweep, skipping fences already shown infeasible, so a circuit is always
  returned when one exists within `max_nodes`.
*/
inline exact_result fence_guided_search( std::uint32_t tt, std::uint32_t num_inputs, search_bounds const& bounds,
                                         std::uint32_t max_nodes = default_max_exact_nodes )
{
  const auto start = std::chrono::steady_clock::now();
  detail::check_target( tt, num_inputs );
  const auto cls = npn_canonize( tt, num_inputs );
  if ( auto c = detail::trivial_circuit( cls.representative, num_inputs ) )
  {
    auto r = detail::finish( tt, num_inputs, cls, std::make_pair( *c, fence{} ), {}, start );
    r.used_fence.reset();
    return r;
  }
  detail::sweep_state st;
  auto found = detail::sweep( cls.representative, num_inputs, std::min( bounds.nodes, max_nodes ), bounds.levels, st );
  if ( !found )
  {
    st.stats.fallback = true;
    found = detail::sweep( cls.representative, num_inputs, max_nodes, max_nodes, st );
  }
  return detail::finish( tt, num_inputs, cls, found, st.stats, start );
}

} // namespace mgvga
