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
  \file checkpoint.hpp
  \brief Named-tensor archives

  Layout: the 8 bytes `MGVGACKP`, a little-endian u64 header length, a JSON
  header `{"format_version", "dtype", "tensors": [{"name", "shape"}], "meta"}`
  and then the float32 little-endian values of every tensor in header order.
*/

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "tensor.hpp"
#include "../util/hash.hpp"

namespace mgvga
{

inline constexpr std::string_view checkpoint_magic = "MGVGACKP";
inline constexpr int checkpoint_format_version = 1;

class checkpoint_error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

static_assert( std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host" );

template<class T>
std::string serialize_checkpoint( parameter_set<T> const& params, nlohmann::json const& meta = nlohmann::json::object() )
{
  nlohmann::json header;
  header["format_version"] = checkpoint_format_version;
  header["dtype"] = "float32";
  header["tensors"] = nlohmann::json::array();
  for ( std::size_t i = 0; i < params.size(); ++i )
  {
    header["tensors"].push_back( { { "name", params[i].name }, { "shape", params[i].shape() } } );
  }
  header["meta"] = meta;
  const auto h = header.dump();

  std::string out( checkpoint_magic );
  std::uint64_t len = h.size();
  out.append( reinterpret_cast<char const*>( &len ), sizeof( len ) );
  out += h;
  for ( std::size_t i = 0; i < params.size(); ++i )
  {
    auto const& v = params[i].value;
    for ( Eigen::Index k = 0; k < v.size(); ++k )
    {
      const float f = static_cast<float>( v.data()[k] );
      out.append( reinterpret_cast<char const*>( &f ), sizeof( f ) );
    }
  }
  return out;
}

struct checkpoint_contents
{
  parameter_set<float> params;
  nlohmann::json meta;
};

inline checkpoint_contents deserialize_checkpoint( std::string_view bytes )
{
  if ( bytes.size() < 16 || bytes.substr( 0, 8 ) != checkpoint_magic )
  {
    throw checkpoint_error( "not a checkpoint archive (bad magic)" );
  }
  std::uint64_t len = 0;
  std::memcpy( &len, bytes.data() + 8, sizeof( len ) );
  if ( len > bytes.size() - 16 )
  {
    throw checkpoint_error( "truncated checkpoint header" );
  }
  nlohmann::json header;
  try
  {
    header = nlohmann::json::parse( bytes.substr( 16, len ) );
  }
  catch ( nlohmann::json::exception const& e )
  {
    throw checkpoint_error( std::string( "malformed checkpoint header: " ) + e.what() );
  }
  if ( header.value( "format_version", 0 ) != checkpoint_format_version || header.value( "dtype", "" ) != "float32" )
  {
    throw checkpoint_error( "unsupported checkpoint version or dtype" );
  }
  checkpoint_contents c;
  c.meta = header.value( "meta", nlohmann::json::object() );
  std::size_t pos = 16 + len;
  for ( auto const& t : header.at( "tensors" ) )
  {
    const auto shape = t.at( "shape" ).get<std::vector<std::size_t>>();
    if ( shape.size() != 2 )
    {
      throw checkpoint_error( "tensor '" + t.at( "name" ).get<std::string>() + "' is not two-dimensional" );
    }
    auto& p = c.params.add( t.at( "name" ).get<std::string>(), static_cast<Eigen::Index>( shape[0] ), static_cast<Eigen::Index>( shape[1] ) );
    const auto bytes_needed = shape[0] * shape[1] * sizeof( float );
    if ( pos + bytes_needed > bytes.size() )
    {
      throw checkpoint_error( "truncated data for tensor '" + p.name + "'" );
    }
    std::memcpy( p.value.data(), bytes.data() + pos, bytes_needed );
    pos += bytes_needed;
  }
  if ( pos != bytes.size() )
  {
    throw checkpoint_error( "trailing bytes after checkpoint data" );
  }
  return c;
}

template<class T>
void save_checkpoint( std::filesystem::path const& path, parameter_set<T> const& params, nlohmann::json const& meta = nlohmann::json::object() )
{
  write_file_atomic( path, serialize_checkpoint( params, meta ) );
}

inline checkpoint_contents load_checkpoint( std::filesystem::path const& path )
{
  return deserialize_checkpoint( read_file( path ) );
}

/*! \brief Copies archived values into an existing set, matching by name and shape. */
template<class T>
void assign_from( parameter_set<T>& dst, parameter_set<float> const& src )
{
  for ( std::size_t i = 0; i < dst.size(); ++i )
  {
    auto* s = src.find( dst[i].name );
    if ( s == nullptr )
    {
      throw checkpoint_error( "checkpoint lacks tensor '" + dst[i].name + "'" );
    }
    if ( s->value.rows() != dst[i].value.rows() || s->value.cols() != dst[i].value.cols() )
    {
      throw checkpoint_error( "shape mismatch for tensor '" + dst[i].name + "'" );
    }
    dst[i].value = s->value.template cast<T>();
  }
}

} // namespace mgvga
