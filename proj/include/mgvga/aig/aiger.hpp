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
  \file aiger.hpp
  \brief AIGER 1.9 reader and writer, combinational subset

  Reading accepts `aag` and `aig` headers with optional B/C/J/F fields that
  must be zero. Latches are rejected. Errors carry the byte offset where
  parsing stopped.
*/

#pragma once

#include <cctype>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "aig_graph.hpp"
#include "literal_network.hpp"
#include "../util/hash.hpp"

namespace mgvga
{

enum class aiger_format
{
  ascii,
  binary
};

class aiger_error : public std::runtime_error
{
public:
  aiger_error( std::string const& msg, std::size_t offset )
      : std::runtime_error( msg + " (at byte " + std::to_string( offset ) + ")" ), offset_( offset )
  {
  }
  std::size_t offset() const { return offset_; }

private:
  std::size_t offset_;
};

namespace detail
{

class aiger_reader
{
public:
  explicit aiger_reader( std::string_view data ) : data_( data ) {}

  std::size_t pos() const { return pos_; }
  bool at_end() const { return pos_ >= data_.size(); }

  [[noreturn]] void fail( std::string const& msg ) const { throw aiger_error( msg, pos_ ); }
  [[noreturn]] void fail_at( std::string const& msg, std::size_t offset ) const { throw aiger_error( msg, offset ); }

  std::string_view word()
  {
    const auto start = pos_;
    while ( pos_ < data_.size() && !std::isspace( static_cast<unsigned char>( data_[pos_] ) ) )
    {
      ++pos_;
    }
    return data_.substr( start, pos_ - start );
  }

  void expect_char( char c, std::string const& what )
  {
    if ( pos_ >= data_.size() || data_[pos_] != c )
    {
      fail( "expected " + what );
    }
    ++pos_;
  }

  std::uint64_t number()
  {
    if ( pos_ >= data_.size() || !std::isdigit( static_cast<unsigned char>( data_[pos_] ) ) )
    {
      fail( "expected unsigned integer" );
    }
    std::uint64_t v = 0;
    while ( pos_ < data_.size() && std::isdigit( static_cast<unsigned char>( data_[pos_] ) ) )
    {
      v = v * 10 + static_cast<std::uint64_t>( data_[pos_] - '0' );
      if ( v > 0xffffffffull )
      {
        fail( "integer out of range" );
      }
      ++pos_;
    }
    return v;
  }

  void newline()
  {
    if ( pos_ < data_.size() && data_[pos_] == '\r' )
    {
      ++pos_;
    }
    expect_char( '\n', "newline" );
  }

  std::string line()
  {
    const auto start = pos_;
    while ( pos_ < data_.size() && data_[pos_] != '\n' )
    {
      ++pos_;
    }
    auto s = std::string( data_.substr( start, pos_ - start ) );
    if ( !s.empty() && s.back() == '\r' )
    {
      s.pop_back();
    }
    if ( pos_ < data_.size() )
    {
      ++pos_;
    }
    return s;
  }

  std::uint32_t varint()
  {
    std::uint64_t x = 0;
    int shift = 0;
    while ( true )
    {
      if ( pos_ >= data_.size() )
      {
        fail( "truncated binary AND section" );
      }
      const auto c = static_cast<unsigned char>( data_[pos_++] );
      x |= static_cast<std::uint64_t>( c & 0x7f ) << shift;
      if ( ( c & 0x80 ) == 0 )
      {
        break;
      }
      shift += 7;
      if ( shift > 35 )
      {
        fail( "binary delta too large" );
      }
    }
    if ( x > 0xffffffffull )
    {
      fail( "binary delta too large" );
    }
    return static_cast<std::uint32_t>( x );
  }

private:
  std::string_view data_;
  std::size_t pos_{ 0 };
};

inline void put_varint( std::string& out, std::uint32_t x )
{
  while ( x & ~0x7fu )
  {
    out.push_back( static_cast<char>( ( x & 0x7f ) | 0x80 ) );
    x >>= 7;
  }
  out.push_back( static_cast<char>( x ) );
}

} // namespace detail

/*!
  \brief Parses an AIGER file into a node-typed graph.

  When `format` is given, the header magic must agree with it.
*/
inline aig_graph parse_aiger( std::string_view bytes, std::optional<aiger_format> format = std::nullopt, std::string name = {} )
{
  detail::aiger_reader in( bytes );
  const auto magic = in.word();
  aiger_format fmt;
  if ( magic == "aag" )
  {
    fmt = aiger_format::ascii;
  }
  else if ( magic == "aig" )
  {
    fmt = aiger_format::binary;
  }
  else
  {
    in.fail_at( "malformed header: expected 'aag' or 'aig'", 0 );
  }
  if ( format && *format != fmt )
  {
    in.fail_at( "header format does not match the requested format", 0 );
  }

  std::vector<std::uint64_t> h;
  while ( !in.at_end() && bytes[in.pos()] == ' ' )
  {
    in.expect_char( ' ', "space" );
    h.push_back( in.number() );
  }
  const auto header_end = in.pos();
  if ( h.size() < 5 || h.size() > 9 )
  {
    in.fail( "malformed header: expected M I L O A" );
  }
  in.newline();
  const auto M = h[0], I = h[1], L = h[2], O = h[3], A = h[4];
  for ( std::size_t k = 5; k < h.size(); ++k )
  {
    if ( h[k] != 0 )
    {
      in.fail_at( "unsupported header field (bad state, constraint, justice or fairness)", header_end );
    }
  }
  if ( L != 0 )
  {
    in.fail_at( "latch present: only combinational AIGs are supported", header_end );
  }
  if ( fmt == aiger_format::binary ? M != I + L + A : M < I + L + A )
  {
    in.fail_at( "malformed header: inconsistent variable count", header_end );
  }

  enum class kind : std::uint8_t
  {
    none,
    input,
    gate
  };
  std::vector<kind> defined( M + 1, kind::none );
  std::vector<std::uint32_t> rhs0( M + 1, 0 ), rhs1( M + 1, 0 );
  std::vector<std::size_t> def_offset( M + 1, 0 );
  std::vector<std::uint32_t> inputs;
  std::vector<std::pair<std::uint32_t, std::size_t>> outputs;
  std::vector<std::uint32_t> and_vars;

  auto check_range = [&]( std::uint64_t lit, std::size_t off ) {
    if ( lit > 2 * M + 1 )
    {
      in.fail_at( "literal " + std::to_string( lit ) + " exceeds maximum variable index", off );
    }
  };

  if ( fmt == aiger_format::ascii )
  {
    for ( std::uint64_t i = 0; i < I; ++i )
    {
      const auto off = in.pos();
      const auto lit = in.number();
      in.newline();
      check_range( lit, off );
      if ( lit < 2 || ( lit & 1 ) || defined[lit >> 1] != kind::none )
      {
        in.fail_at( "invalid input literal " + std::to_string( lit ), off );
      }
      defined[lit >> 1] = kind::input;
      def_offset[lit >> 1] = off;
      inputs.push_back( static_cast<std::uint32_t>( lit >> 1 ) );
    }
  }
  else
  {
    for ( std::uint64_t i = 0; i < I; ++i )
    {
      defined[i + 1] = kind::input;
      inputs.push_back( static_cast<std::uint32_t>( i + 1 ) );
    }
  }

  for ( std::uint64_t i = 0; i < O; ++i )
  {
    const auto off = in.pos();
    const auto lit = in.number();
    in.newline();
    check_range( lit, off );
    outputs.emplace_back( static_cast<std::uint32_t>( lit ), off );
  }

  if ( fmt == aiger_format::ascii )
  {
    for ( std::uint64_t i = 0; i < A; ++i )
    {
      const auto off = in.pos();
      const auto lhs = in.number();
      in.expect_char( ' ', "space" );
      const auto r0 = in.number();
      in.expect_char( ' ', "space" );
      const auto r1 = in.number();
      in.newline();
      check_range( lhs, off );
      check_range( r0, off );
      check_range( r1, off );
      if ( lhs < 2 || ( lhs & 1 ) || defined[lhs >> 1] != kind::none )
      {
        in.fail_at( "invalid AND left-hand side " + std::to_string( lhs ), off );
      }
      const auto v = static_cast<std::uint32_t>( lhs >> 1 );
      defined[v] = kind::gate;
      rhs0[v] = static_cast<std::uint32_t>( r0 );
      rhs1[v] = static_cast<std::uint32_t>( r1 );
      def_offset[v] = off;
      and_vars.push_back( v );
    }
  }
  else
  {
    for ( std::uint64_t i = 0; i < A; ++i )
    {
      const auto off = in.pos();
      const auto lhs = 2 * ( I + L + i + 1 );
      const auto d0 = in.varint();
      const auto d1 = in.varint();
      if ( d0 == 0 || d0 > lhs || d1 > lhs - d0 )
      {
        in.fail_at( "invalid binary AND delta", off );
      }
      const auto r0 = lhs - d0;
      const auto r1 = r0 - d1;
      const auto v = static_cast<std::uint32_t>( lhs >> 1 );
      defined[v] = kind::gate;
      rhs0[v] = static_cast<std::uint32_t>( r0 );
      rhs1[v] = static_cast<std::uint32_t>( r1 );
      def_offset[v] = off;
      and_vars.push_back( v );
    }
  }

  // dangling literals: every referenced variable must be constant, input or gate
  for ( auto v : and_vars )
  {
    for ( auto l : { rhs0[v], rhs1[v] } )
    {
      if ( ( l >> 1 ) != 0 && defined[l >> 1] == kind::none )
      {
        in.fail_at( "dangling literal " + std::to_string( l ), def_offset[v] );
      }
    }
  }
  for ( auto const& [l, off] : outputs )
  {
    if ( ( l >> 1 ) != 0 && defined[l >> 1] == kind::none )
    {
      in.fail_at( "dangling output literal " + std::to_string( l ), off );
    }
  }

  // symbol table and comments
  std::vector<std::string> in_names( I ), out_names( O );
  while ( !in.at_end() )
  {
    const auto off = in.pos();
    const auto text = in.line();
    if ( text == "c" )
    {
      break;
    }
    if ( text.empty() )
    {
      continue;
    }
    const auto space = text.find( ' ' );
    if ( ( text[0] != 'i' && text[0] != 'o' && text[0] != 'l' && text[0] != 'b' && text[0] != 'c' && text[0] != 'j' && text[0] != 'f' ) ||
         space == std::string::npos || space < 2 )
    {
      in.fail_at( "malformed symbol table entry", off );
    }
    std::size_t idx = 0;
    try
    {
      idx = std::stoul( text.substr( 1, space - 1 ) );
    }
    catch ( std::exception const& )
    {
      in.fail_at( "malformed symbol table index", off );
    }
    if ( text[0] == 'i' && idx < in_names.size() )
    {
      in_names[idx] = text.substr( space + 1 );
    }
    else if ( text[0] == 'o' && idx < out_names.size() )
    {
      out_names[idx] = text.substr( space + 1 );
    }
    else
    {
      in.fail_at( "symbol table entry out of range", off );
    }
  }

  // topological order over gates (ASCII files may list them in any order)
  std::vector<std::uint8_t> state( M + 1, 0 ); /* 0 new, 1 on stack, 2 done */
  std::vector<std::uint32_t> order;
  order.reserve( and_vars.size() );
  for ( auto root : and_vars )
  {
    if ( state[root] )
    {
      continue;
    }
    std::vector<std::pair<std::uint32_t, int>> stack{ { root, 0 } };
    state[root] = 1;
    while ( !stack.empty() )
    {
      auto& [v, next] = stack.back();
      if ( next < 2 )
      {
        const auto child = ( next == 0 ? rhs0[v] : rhs1[v] ) >> 1;
        ++next;
        if ( defined[child] == kind::gate )
        {
          if ( state[child] == 1 )
          {
            in.fail_at( "combinational cycle through variable " + std::to_string( child ), def_offset[child] );
          }
          if ( state[child] == 0 )
          {
            state[child] = 1;
            stack.emplace_back( child, 0 );
          }
        }
        continue;
      }
      state[v] = 2;
      order.push_back( v );
      stack.pop_back();
    }
  }

  literal_network net;
  std::vector<literal> map( M + 1, literal_false );
  for ( std::size_t i = 0; i < inputs.size(); ++i )
  {
    map[inputs[i]] = net.create_pi( in_names[i] );
  }
  auto translate = [&]( std::uint32_t l ) { return map[l >> 1] ^ ( l & 1u ); };
  for ( auto v : order )
  {
    map[v] = net.create_and( translate( rhs0[v] ), translate( rhs1[v] ) );
  }
  for ( std::size_t i = 0; i < outputs.size(); ++i )
  {
    net.create_po( translate( outputs[i].first ), out_names[i] );
  }
  return net.to_graph( std::move( name ) );
}

/*! \brief Serializes a graph; NOT nodes become complement bits. Rejects MASKED nodes. */
inline std::string write_aiger( aig_graph const& g, aiger_format format )
{
  if ( g.has_masked() )
  {
    throw graph_error( "cannot write a graph containing MASKED nodes" );
  }
  const auto net = network_from_graph( g );
  const auto I = net.num_pis();
  const auto A = net.num_ands();
  const auto O = net.num_pos();
  const auto M = I + A;

  std::string out;
  out += format == aiger_format::ascii ? "aag " : "aig ";
  out += std::to_string( M ) + " " + std::to_string( I ) + " 0 " + std::to_string( O ) + " " + std::to_string( A ) + "\n";
  if ( format == aiger_format::ascii )
  {
    for ( std::size_t i = 0; i < I; ++i )
    {
      out += std::to_string( 2 * ( i + 1 ) ) + "\n";
    }
  }
  for ( auto l : net.outputs() )
  {
    out += std::to_string( l ) + "\n";
  }
  for ( std::size_t k = 0; k < A; ++k )
  {
    const auto lhs = static_cast<std::uint32_t>( 2 * ( I + k + 1 ) );
    auto [a, b] = net.ands()[k];
    if ( a < b )
    {
      std::swap( a, b );
    }
    if ( format == aiger_format::ascii )
    {
      out += std::to_string( lhs ) + " " + std::to_string( a ) + " " + std::to_string( b ) + "\n";
    }
    else
    {
      detail::put_varint( out, lhs - a );
      detail::put_varint( out, a - b );
    }
  }
  for ( std::size_t i = 0; i < I; ++i )
  {
    if ( !net.pi_names()[i].empty() )
    {
      out += "i" + std::to_string( i ) + " " + net.pi_names()[i] + "\n";
    }
  }
  for ( std::size_t i = 0; i < O; ++i )
  {
    if ( !net.po_names()[i].empty() )
    {
      out += "o" + std::to_string( i ) + " " + net.po_names()[i] + "\n";
    }
  }
  return out;
}

inline aig_graph read_aiger_file( std::filesystem::path const& path )
{
  return parse_aiger( read_file( path ), std::nullopt, path.stem().string() );
}

} // namespace mgvga
