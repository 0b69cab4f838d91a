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
  \file verilog_frontend.hpp
  \brief Built-in front-end for single-module, single-bit structural Verilog

  Accepted: one `module` with ANSI or non-ANSI scalar ports, `wire`
  declarations and continuous `assign` statements over `~ ! & && | || ^ ~^ ^~`,
  the conditional operator, parentheses and the constants 0/1 (optionally
  sized, e.g. 1'b1). Anything else is an elaboration error.
*/

#pragma once

#include <cstdint>
#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "../aig/literal_network.hpp"
#include "../verilog/tokenizer.hpp"

namespace mgvga
{

class elaboration_error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

namespace detail
{

class verilog_elaborator
{
public:
  explicit verilog_elaborator( std::string_view source ) : tokens_( tokenize_verilog( source ) ) {}

  aig_graph run()
  {
    parse_module();
    literal_network net;
    for ( auto const& in : inputs_ )
    {
      values_[in] = net.create_pi( in );
    }
    for ( auto const& out : outputs_ )
    {
      net.create_po( value_of( net, out ), out );
    }
    return net.to_graph( module_name_ );
  }

private:
  enum class kind
  {
    ident,
    constant,
    op_not,
    op_and,
    op_or,
    op_xor,
    op_xnor,
    op_mux
  };

  struct expr
  {
    kind k;
    std::string name;
    bool value{ false };
    std::vector<std::uint32_t> args;
  };

  enum class signal_kind
  {
    input,
    output,
    wire
  };

  [[noreturn]] void fail( std::string const& msg ) const
  {
    throw elaboration_error( "verilog: " + msg + " (at token " + std::to_string( pos_ ) + ( pos_ < tokens_.size() ? " '" + tokens_[pos_] + "'" : "" ) + ")" );
  }

  bool at_end() const { return pos_ >= tokens_.size(); }
  std::string const& peek() const
  {
    static const std::string eof;
    return at_end() ? eof : tokens_[pos_];
  }
  bool accept( std::string_view t )
  {
    if ( !at_end() && tokens_[pos_] == t )
    {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect( std::string_view t )
  {
    if ( !accept( t ) )
    {
      fail( "expected '" + std::string( t ) + "'" );
    }
  }
  static bool is_identifier( std::string const& t )
  {
    return !t.empty() && ( std::isalpha( static_cast<unsigned char>( t[0] ) ) || t[0] == '_' || t[0] == '\\' ) && !is_keyword( t );
  }
  static bool is_keyword( std::string const& t )
  {
    static const char* kw[] = { "module", "endmodule", "input", "output", "inout", "wire", "reg", "assign", "always", "begin", "end" };
    return std::any_of( std::begin( kw ), std::end( kw ), [&]( char const* k ) { return t == k; } );
  }
  std::string identifier()
  {
    if ( !is_identifier( peek() ) )
    {
      fail( "expected an identifier" );
    }
    return tokens_[pos_++];
  }

  void declare( std::string const& name, signal_kind k )
  {
    auto it = signals_.find( name );
    if ( it != signals_.end() )
    {
      // `output y; wire y;` and a port list entry followed by its direction are both fine
      if ( it->second == k || k == signal_kind::wire )
      {
        return;
      }
      if ( it->second != signal_kind::wire )
      {
        fail( "signal '" + name + "' declared twice with different directions" );
      }
    }
    signals_[name] = k;
    if ( k == signal_kind::input )
    {
      inputs_.push_back( name );
    }
    else if ( k == signal_kind::output )
    {
      outputs_.push_back( name );
    }
  }

  void reject_range()
  {
    if ( peek() == "[" )
    {
      fail( "vector signals are not supported by the built-in front-end" );
    }
  }

  void parse_module()
  {
    expect( "module" );
    module_name_ = identifier();
    std::vector<std::string> port_order;
    if ( accept( "(" ) )
    {
      std::optional<signal_kind> dir;
      if ( !accept( ")" ) )
      {
        do
        {
          if ( accept( "input" ) )
          {
            dir = signal_kind::input;
          }
          else if ( accept( "output" ) )
          {
            dir = signal_kind::output;
          }
          else if ( peek() == "inout" )
          {
            fail( "inout ports are not supported" );
          }
          accept( "wire" );
          reject_range();
          const auto name = identifier();
          port_order.push_back( name );
          if ( dir )
          {
            declare( name, *dir );
          }
        } while ( accept( "," ) );
        expect( ")" );
      }
    }
    expect( ";" );
    while ( !accept( "endmodule" ) )
    {
      if ( at_end() )
      {
        fail( "missing endmodule" );
      }
      if ( accept( "input" ) || accept( "output" ) || accept( "wire" ) )
      {
        const auto& kw = tokens_[pos_ - 1];
        const auto k = kw == "input" ? signal_kind::input : kw == "output" ? signal_kind::output : signal_kind::wire;
        accept( "wire" );
        reject_range();
        do
        {
          const auto name = identifier();
          if ( k != signal_kind::wire && !port_order.empty() &&
               std::find( port_order.begin(), port_order.end(), name ) == port_order.end() )
          {
            fail( "'" + name + "' is not in the port list" );
          }
          declare( name, k );
          if ( k == signal_kind::wire && accept( "=" ) )
          {
            define( name, parse_expr() );
          }
        } while ( accept( "," ) );
        expect( ";" );
      }
      else if ( accept( "assign" ) )
      {
        do
        {
          const auto name = identifier();
          expect( "=" );
          define( name, parse_expr() );
        } while ( accept( "," ) );
        expect( ";" );
      }
      else
      {
        fail( "unsupported construct" );
      }
    }
    if ( !at_end() )
    {
      fail( "only one module per file is supported" );
    }
    // non-ANSI ports must all receive a direction
    for ( auto const& p : port_order )
    {
      auto it = signals_.find( p );
      if ( it == signals_.end() || it->second == signal_kind::wire )
      {
        throw elaboration_error( "verilog: port '" + p + "' has no direction" );
      }
    }
    // ports follow port-list order when one exists
    if ( !port_order.empty() )
    {
      std::vector<std::string> ins, outs;
      for ( auto const& p : port_order )
      {
        ( signals_[p] == signal_kind::input ? ins : outs ).push_back( p );
      }
      inputs_ = ins;
      outputs_ = outs;
    }
    for ( auto const& o : outputs_ )
    {
      if ( !drivers_.count( o ) )
      {
        throw elaboration_error( "verilog: output '" + o + "' is never assigned" );
      }
    }
  }

  void define( std::string const& name, std::uint32_t e )
  {
    auto it = signals_.find( name );
    if ( it == signals_.end() )
    {
      fail( "assignment to undeclared signal '" + name + "'" );
    }
    if ( it->second == signal_kind::input )
    {
      fail( "assignment to input '" + name + "'" );
    }
    if ( !drivers_.emplace( name, e ).second )
    {
      fail( "signal '" + name + "' has multiple drivers" );
    }
  }

  std::uint32_t push( expr e )
  {
    nodes_.push_back( std::move( e ) );
    return static_cast<std::uint32_t>( nodes_.size() - 1 );
  }

  std::uint32_t parse_expr()
  {
    const auto c = parse_binary( 0 );
    if ( accept( "?" ) )
    {
      const auto t = parse_expr();
      expect( ":" );
      const auto f = parse_expr();
      return push( { kind::op_mux, {}, false, { c, t, f } } );
    }
    return c;
  }

  /* level 0: | ||, level 1: ^ ~^ ^~, level 2: & && */
  std::uint32_t parse_binary( int level )
  {
    if ( level == 3 )
    {
      return parse_unary();
    }
    auto lhs = parse_binary( level + 1 );
    while ( true )
    {
      kind k;
      if ( level == 0 && ( accept( "|" ) || accept( "||" ) ) )
      {
        k = kind::op_or;
      }
      else if ( level == 1 && accept( "^" ) )
      {
        k = kind::op_xor;
      }
      else if ( level == 1 && ( accept( "~^" ) || accept( "^~" ) ) )
      {
        k = kind::op_xnor;
      }
      else if ( level == 2 && ( accept( "&" ) || accept( "&&" ) ) )
      {
        k = kind::op_and;
      }
      else
      {
        return lhs;
      }
      const auto rhs = parse_binary( level + 1 );
      lhs = push( { k, {}, false, { lhs, rhs } } );
    }
  }

  std::uint32_t parse_unary()
  {
    if ( accept( "~" ) || accept( "!" ) )
    {
      return push( { kind::op_not, {}, false, { parse_unary() } } );
    }
    if ( accept( "(" ) )
    {
      const auto e = parse_expr();
      expect( ")" );
      return e;
    }
    const auto& t = peek();
    if ( !t.empty() && std::isdigit( static_cast<unsigned char>( t[0] ) ) )
    {
      ++pos_;
      const auto q = t.find( '\'' );
      const auto digits = q == std::string::npos ? t : t.substr( q + 2 );
      if ( digits != "0" && digits != "1" )
      {
        fail( "only single-bit constants 0 and 1 are supported" );
      }
      return push( { kind::constant, {}, digits == "1", {} } );
    }
    const auto name = identifier();
    if ( !signals_.count( name ) )
    {
      fail( "undeclared identifier '" + name + "'" );
    }
    return push( { kind::ident, name, false, {} } );
  }

  literal value_of( literal_network& net, std::string const& name )
  {
    if ( auto it = values_.find( name ); it != values_.end() )
    {
      return it->second;
    }
    auto d = drivers_.find( name );
    if ( d == drivers_.end() )
    {
      throw elaboration_error( "verilog: signal '" + name + "' is read but never driven" );
    }
    if ( !in_progress_.insert( name ).second )
    {
      throw elaboration_error( "verilog: combinational loop through '" + name + "'" );
    }
    const auto v = eval( net, d->second );
    in_progress_.erase( name );
    values_[name] = v;
    return v;
  }

  literal eval( literal_network& net, std::uint32_t id )
  {
    auto const& e = nodes_[id];
    auto arg = [&]( std::size_t i ) { return eval( net, e.args[i] ); };
    switch ( e.k )
    {
    case kind::ident:
      return value_of( net, e.name );
    case kind::constant:
      return e.value ? literal_true : literal_false;
    case kind::op_not:
      return literal_negate( arg( 0 ) );
    case kind::op_and:
      return net.create_and_hashed( arg( 0 ), arg( 1 ) );
    case kind::op_or:
      return net.create_or( arg( 0 ), arg( 1 ) );
    case kind::op_xor:
      return net.create_xor( arg( 0 ), arg( 1 ) );
    case kind::op_xnor:
      return literal_negate( net.create_xor( arg( 0 ), arg( 1 ) ) );
    case kind::op_mux:
    {
      const auto c = arg( 0 );
      const auto t = arg( 1 );
      const auto f = arg( 2 );
      return net.create_or( net.create_and_hashed( c, t ), net.create_and_hashed( literal_negate( c ), f ) );
    }
    }
    return literal_false;
  }

  std::vector<std::string> tokens_;
  std::size_t pos_{ 0 };
  std::string module_name_;
  std::map<std::string, signal_kind> signals_;
  std::vector<std::string> inputs_, outputs_;
  std::map<std::string, std::uint32_t> drivers_;
  std::vector<expr> nodes_;
  std::map<std::string, literal> values_;
  std::set<std::string> in_progress_;
};

} // namespace detail

/*! \brief Elaborates a structural single-bit module into an AIG (hashed, NOTs as nodes). */
inline aig_graph elaborate_verilog( std::string_view source )
{
  return detail::verilog_elaborator( source ).run();
}

} // namespace mgvga
