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
  \file kv_config.hpp
  \brief Flat `key = value` configuration files (a TOML subset)

  Supports `# comments`, `[section]` headers (keys become `section.key`),
  bare or double-quoted string values, numbers and booleans. Every lookup
  with a default records the resolved value so a run can persist the
  fully-defaulted configuration it actually used.
*/

#pragma once

#include <charconv>
#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mgvga
{

class config_error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class kv_config
{
public:
  kv_config() = default;

  static kv_config parse( std::string_view text )
  {
    kv_config cfg;
    std::string section;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while ( pos <= text.size() )
    {
      const auto end = text.find( '\n', pos );
      auto line = std::string( text.substr( pos, end == std::string_view::npos ? std::string_view::npos : end - pos ) );
      pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
      ++line_no;

      line = strip_comment( line );
      line = trim( line );
      if ( line.empty() )
      {
        continue;
      }
      if ( line.front() == '[' )
      {
        if ( line.back() != ']' )
        {
          throw config_error( "line " + std::to_string( line_no ) + ": unterminated section header" );
        }
        section = trim( line.substr( 1, line.size() - 2 ) );
        continue;
      }
      const auto eq = line.find( '=' );
      if ( eq == std::string::npos )
      {
        throw config_error( "line " + std::to_string( line_no ) + ": expected key = value" );
      }
      auto key = trim( line.substr( 0, eq ) );
      auto value = trim( line.substr( eq + 1 ) );
      if ( key.empty() )
      {
        throw config_error( "line " + std::to_string( line_no ) + ": empty key" );
      }
      if ( value.size() >= 2 && value.front() == '"' && value.back() == '"' )
      {
        value = value.substr( 1, value.size() - 2 );
      }
      cfg.values_[section.empty() ? key : section + "." + key] = value;
    }
    return cfg;
  }

  bool contains( std::string const& key ) const { return values_.count( key ) != 0; }

  void set( std::string const& key, std::string value ) { values_[key] = std::move( value ); }

  std::string get_string( std::string const& key, std::string const& fallback )
  {
    const auto it = values_.find( key );
    const auto v = it == values_.end() ? fallback : it->second;
    resolved_[key] = quote( v );
    return v;
  }

  double get_double( std::string const& key, double fallback )
  {
    const auto it = values_.find( key );
    double v = fallback;
    if ( it != values_.end() )
    {
      try
      {
        std::size_t used = 0;
        v = std::stod( it->second, &used );
        if ( used != it->second.size() )
        {
          throw std::invalid_argument( "trailing" );
        }
      }
      catch ( std::exception const& )
      {
        throw config_error( "key '" + key + "': expected a number, got '" + it->second + "'" );
      }
    }
    char buf[32];
    const auto res = std::to_chars( buf, buf + sizeof( buf ), v );
    resolved_[key] = std::string( buf, res.ptr );
    return v;
  }

  std::int64_t get_int( std::string const& key, std::int64_t fallback )
  {
    const auto it = values_.find( key );
    std::int64_t v = fallback;
    if ( it != values_.end() )
    {
      const auto& s = it->second;
      const auto [ptr, ec] = std::from_chars( s.data(), s.data() + s.size(), v );
      if ( ec != std::errc() || ptr != s.data() + s.size() )
      {
        throw config_error( "key '" + key + "': expected an integer, got '" + s + "'" );
      }
    }
    resolved_[key] = std::to_string( v );
    return v;
  }

  bool get_bool( std::string const& key, bool fallback )
  {
    const auto it = values_.find( key );
    bool v = fallback;
    if ( it != values_.end() )
    {
      if ( it->second == "true" || it->second == "1" )
      {
        v = true;
      }
      else if ( it->second == "false" || it->second == "0" )
      {
        v = false;
      }
      else
      {
        throw config_error( "key '" + key + "': expected true/false, got '" + it->second + "'" );
      }
    }
    resolved_[key] = v ? "true" : "false";
    return v;
  }

  /*! \brief Keys present in the file that no lookup consumed. */
  std::vector<std::string> unused_keys() const
  {
    std::vector<std::string> out;
    for ( auto const& [k, v] : values_ )
    {
      if ( resolved_.count( k ) == 0 )
      {
        out.push_back( k );
      }
    }
    return out;
  }

  /*! \brief Serializes every resolved lookup, sorted by key. */
  std::string resolved_text() const
  {
    std::string out;
    for ( auto const& [k, v] : resolved_ )
    {
      out += k + " = " + v + "\n";
    }
    return out;
  }

private:
  static std::string trim( std::string const& s )
  {
    const auto b = s.find_first_not_of( " \t\r" );
    if ( b == std::string::npos )
    {
      return {};
    }
    const auto e = s.find_last_not_of( " \t\r" );
    return s.substr( b, e - b + 1 );
  }

  static std::string strip_comment( std::string const& s )
  {
    bool quoted = false;
    for ( std::size_t i = 0; i < s.size(); ++i )
    {
      if ( s[i] == '"' )
      {
        quoted = !quoted;
      }
      else if ( s[i] == '#' && !quoted )
      {
        return s.substr( 0, i );
      }
    }
    return s;
  }

  static std::string quote( std::string const& s )
  {
    return "\"" + s + "\"";
  }

  std::map<std::string, std::string> values_;
  std::map<std::string, std::string> resolved_;
};

} // namespace mgvga
