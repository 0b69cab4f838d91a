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
  \file verilog_gen.hpp
  \brief Random structural Verilog designs for Verilog-AIG pairs
*/

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "../util/random.hpp"

namespace mgvga
{

struct verilog_gen_options
{
  std::uint32_t min_inputs{ 3 };
  std::uint32_t max_inputs{ 6 };
  std::uint32_t min_wires{ 6 };
  std::uint32_t max_wires{ 20 };
  std::uint32_t max_outputs{ 3 };
};

struct verilog_design
{
  std::string name;
  std::string source;
};

/*!
  \brief One module of `assign` statements over earlier signals.

  Each wire applies one of AND, OR, XOR, NAND, AND-NOT, NOT or a 2:1 mux.
  Operands favor recent signals so the logic is deep rather than flat, and
  outputs are taken from the last wires.
*/
inline verilog_design generate_verilog( std::string name, std::uint64_t seed, verilog_gen_options const& o = {} )
{
  rng r( seed );
  const auto n_in = o.min_inputs + static_cast<std::uint32_t>( r.below( o.max_inputs - o.min_inputs + 1 ) );
  const auto n_wire = o.min_wires + static_cast<std::uint32_t>( r.below( o.max_wires - o.min_wires + 1 ) );
  const auto n_out = 1 + static_cast<std::uint32_t>( r.below( std::min( o.max_outputs, n_wire ) ) );

  std::vector<std::string> signals;
  std::string ports, body;
  for ( std::uint32_t i = 0; i < n_in; ++i )
  {
    signals.push_back( "in" + std::to_string( i ) );
    ports += "input " + signals.back() + ", ";
  }
  auto pick = [&]() -> std::string const& {
    // half the draws come from the four most recent signals
    const auto n = signals.size();
    if ( n > 4 && r.bernoulli( 0.5 ) )
    {
      return signals[n - 1 - r.below( 4 )];
    }
    return signals[r.below( n )];
  };
  auto pick_other = [&]( std::string const& avoid ) -> std::string {
    for ( int tries = 0; tries < 8; ++tries )
    {
      auto const& s = pick();
      if ( s != avoid )
      {
        return s;
      }
    }
    return signals[0] == avoid ? signals[1] : signals[0];
  };

  for ( std::uint32_t w = 0; w < n_wire; ++w )
  {
    const auto a = pick();
    const auto b = pick_other( a );
    std::string rhs;
    switch ( r.below( 7 ) )
    {
    case 0:
      rhs = a + " & " + b;
      break;
    case 1:
      rhs = a + " | " + b;
      break;
    case 2:
      rhs = a + " ^ " + b;
      break;
    case 3:
      rhs = "~(" + a + " & " + b + ")";
      break;
    case 4:
      rhs = a + " & ~" + b;
      break;
    case 5:
      rhs = "~" + a;
      break;
    default:
    {
      const auto s = pick_other( a );
      rhs = s + " ? " + a + " : " + ( s == b ? pick_other( s ) : b );
      break;
    }
    }
    const auto wn = "w" + std::to_string( w );
    body += "  wire " + wn + ";\n  assign " + wn + " = " + rhs + ";\n";
    signals.push_back( wn );
  }
  std::string outs;
  for ( std::uint32_t k = 0; k < n_out; ++k )
  {
    const auto on = "out" + std::to_string( k );
    ports += "output " + on + ( k + 1 < n_out ? ", " : "" );
    outs += "  assign " + on + " = " + signals[signals.size() - 1 - k] + ";\n";
  }
  verilog_design d;
  d.name = std::move( name );
  d.source = "module " + d.name + "(" + ports + ");\n" + body + outs + "endmodule\n";
  return d;
}

} // namespace mgvga
