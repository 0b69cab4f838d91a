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
  \file config.hpp
  \brief Model dimensions and layer counts
*/

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "../util/kv_config.hpp"

namespace mgvga
{

enum class aggregation
{
  sum, /* adds neighbor messages; sees fan-in/fan-out counts */
  mean /* averages neighbor messages */
};

inline std::string to_string( aggregation a ) { return a == aggregation::sum ? "sum" : "mean"; }

inline aggregation aggregation_from_string( std::string const& s )
{
  if ( s == "sum" )
  {
    return aggregation::sum;
  }
  if ( s == "mean" )
  {
    return aggregation::mean;
  }
  throw config_error( "unknown aggregation '" + s + "' (expected sum or mean)" );
}

struct model_config
{
  std::uint32_t d{ 64 };
  std::uint32_t d_v{ 256 };
  std::uint32_t encoder_layers{ 7 };
  std::uint32_t decoder_layers{ 2 };
  aggregation agg{ aggregation::sum };

  void validate() const
  {
    if ( d == 0 || d_v == 0 )
    {
      throw config_error( "model dimensions must be positive" );
    }
  }

  static model_config from( kv_config& cfg )
  {
    model_config m;
    m.d = static_cast<std::uint32_t>( cfg.get_int( "model.d", m.d ) );
    m.d_v = static_cast<std::uint32_t>( cfg.get_int( "model.d_v", m.d_v ) );
    m.encoder_layers = static_cast<std::uint32_t>( cfg.get_int( "model.encoder_layers", m.encoder_layers ) );
    m.decoder_layers = static_cast<std::uint32_t>( cfg.get_int( "model.decoder_layers", m.decoder_layers ) );
    m.agg = aggregation_from_string( cfg.get_string( "model.aggregation", to_string( m.agg ) ) );
    m.validate();
    return m;
  }
};

} // namespace mgvga
