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
  \file tokenizer.hpp
  \brief Verilog tokenizer for embedding

  Tokens are identifiers and keywords (including `$system` names and
  escaped identifiers), numbers with optional size and base (`4'b10_10`),
  string literals, the multi-character operators listed in
  `multi_char_operators`, and any other single non-space character.
  Whitespace and comments are dropped. "module m; endmodule" yields the four
  tokens `module`, `m`, `;`, `endmodule`.
*/

#pragma once

#include <array>
#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace mgvga
{

inline constexpr std::array<std::string_view, 24> multi_char_operators = {
    "<<<", ">>>", "===", "!==", "==", "!=", "<=", ">=", "&&", "||", "<<", ">>",
    "~&",  "~|",  "~^",  "^~",  "**", "->", "+:", "-:", "(*", "*)", "::", "@*" };

inline std::vector<std::string> tokenize_verilog( std::string_view src )
{
  std::vector<std::string> out;
  std::size_t i = 0;
  const auto n = src.size();
  auto is_ident_start = []( char c ) { return std::isalpha( static_cast<unsigned char>( c ) ) || c == '_' || c == '$'; };
  auto is_ident_char = []( char c ) { return std::isalnum( static_cast<unsigned char>( c ) ) || c == '_' || c == '$'; };
  auto is_digit = []( char c ) { return std::isdigit( static_cast<unsigned char>( c ) ) != 0; };

  while ( i < n )
  {
    const char c = src[i];
    if ( std::isspace( static_cast<unsigned char>( c ) ) )
    {
      ++i;
      continue;
    }
    if ( c == '/' && i + 1 < n && src[i + 1] == '/' )
    {
      while ( i < n && src[i] != '\n' )
      {
        ++i;
      }
      continue;
    }
    if ( c == '/' && i + 1 < n && src[i + 1] == '*' )
    {
      const auto end = src.find( "*/", i + 2 );
      i = end == std::string_view::npos ? n : end + 2;
      continue;
    }
    const auto start = i;
    if ( is_ident_start( c ) )
    {
      while ( i < n && is_ident_char( src[i] ) )
      {
        ++i;
      }
    }
    else if ( c == '\\' )
    {
      while ( i < n && !std::isspace( static_cast<unsigned char>( src[i] ) ) )
      {
        ++i;
      }
    }
    else if ( is_digit( c ) || ( c == '\'' && i + 1 < n && std::string_view( "sSbBoOdDhH" ).find( src[i + 1] ) != std::string_view::npos ) )
    {
      // [size] ['[s]base] digits
      while ( i < n && ( is_digit( src[i] ) || src[i] == '_' ) )
      {
        ++i;
      }
      if ( i < n && src[i] == '\'' )
      {
        ++i;
        if ( i < n && ( src[i] == 's' || src[i] == 'S' ) )
        {
          ++i;
        }
        if ( i < n && std::string_view( "bBoOdDhH" ).find( src[i] ) != std::string_view::npos )
        {
          ++i;
        }
        while ( i < n && ( std::isxdigit( static_cast<unsigned char>( src[i] ) ) || src[i] == '_' || src[i] == 'x' ||
                           src[i] == 'X' || src[i] == 'z' || src[i] == 'Z' || src[i] == '?' ) )
        {
          ++i;
        }
      }
      else if ( i < n && src[i] == '.' && i + 1 < n && is_digit( src[i + 1] ) )
      {
        ++i;
        while ( i < n && ( is_digit( src[i] ) || src[i] == '_' ) )
        {
          ++i;
        }
      }
    }
    else if ( c == '"' )
    {
      ++i;
      while ( i < n && src[i] != '"' )
      {
        i += ( src[i] == '\\' && i + 1 < n ) ? 2 : 1;
      }
      i = std::min( i + 1, n );
    }
    else
    {
      std::size_t len = 1;
      for ( auto op : multi_char_operators )
      {
        if ( src.substr( i, op.size() ) == op )
        {
          len = op.size();
          break;
        }
      }
      i += len;
    }
    out.emplace_back( src.substr( start, i - start ) );
  }
  return out;
}

} // namespace mgvga
