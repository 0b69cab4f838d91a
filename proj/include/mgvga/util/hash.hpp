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

#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>
#include <string_view>

#include <openssl/evp.h>

namespace mgvga
{

inline std::uint64_t fnv1a64( std::string_view s, std::uint64_t basis = 0xcbf29ce484222325ull )
{
  std::uint64_t h = basis;
  for ( unsigned char c : s )
  {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string sha256_hex( std::string_view data )
{
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if ( EVP_Digest( data.data(), data.size(), digest, &len, EVP_sha256(), nullptr ) != 1 )
  {
    throw std::runtime_error( "sha256 digest failed" );
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve( 2 * len );
  for ( unsigned i = 0; i < len; ++i )
  {
    out.push_back( hex[digest[i] >> 4] );
    out.push_back( hex[digest[i] & 0xf] );
  }
  return out;
}

inline std::string read_file( std::filesystem::path const& path )
{
  std::ifstream in( path, std::ios::binary );
  if ( !in )
  {
    throw std::runtime_error( "cannot open " + path.string() );
  }
  return std::string( std::istreambuf_iterator<char>( in ), std::istreambuf_iterator<char>() );
}

inline std::string sha256_file( std::filesystem::path const& path )
{
  return sha256_hex( read_file( path ) );
}

/*! \brief Writes through a temporary sibling and renames it into place. */
inline void write_file_atomic( std::filesystem::path const& path, std::string_view bytes )
{
  if ( path.has_parent_path() )
  {
    std::filesystem::create_directories( path.parent_path() );
  }
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out( tmp, std::ios::binary | std::ios::trunc );
    if ( !out )
    {
      throw std::runtime_error( "cannot write " + tmp.string() );
    }
    out.write( bytes.data(), static_cast<std::streamsize>( bytes.size() ) );
    if ( !out )
    {
      throw std::runtime_error( "write failed for " + tmp.string() );
    }
  }
  std::filesystem::rename( tmp, path );
}

} // namespace mgvga
