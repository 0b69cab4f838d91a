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
  \file svg_plot.hpp
  \brief Minimal SVG line plots (loss curves, ROC curves)
*/

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace mgvga
{

struct plot_series
{
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct plot_options
{
  std::string title;
  std::string x_label;
  std::string y_label;
  int width{ 640 };
  int height{ 420 };
  bool diagonal{ false }; /* dashed y = x reference, for ROC */
};

namespace detail
{

inline std::string xml_escape( std::string const& s )
{
  std::string o;
  for ( char c : s )
  {
    switch ( c )
    {
    case '<': o += "&lt;"; break;
    case '>': o += "&gt;"; break;
    case '&': o += "&amp;"; break;
    case '"': o += "&quot;"; break;
    default: o.push_back( c );
    }
  }
  return o;
}

} // namespace detail

inline std::string svg_line_plot( std::vector<plot_series> const& series, plot_options const& o )
{
  static constexpr char const* colors[] = { "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b" };
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for ( auto const& s : series )
  {
    for ( std::size_t i = 0; i < std::min( s.x.size(), s.y.size() ); ++i )
    {
      if ( std::isfinite( s.x[i] ) && std::isfinite( s.y[i] ) )
      {
        x0 = std::min( x0, s.x[i] );
        x1 = std::max( x1, s.x[i] );
        y0 = std::min( y0, s.y[i] );
        y1 = std::max( y1, s.y[i] );
      }
    }
  }
  if ( !std::isfinite( x0 ) )
  {
    x0 = y0 = 0.0;
    x1 = y1 = 1.0;
  }
  if ( x1 == x0 )
  {
    x1 = x0 + 1.0;
  }
  if ( y1 == y0 )
  {
    y1 = y0 + 1.0;
  }
  const double ml = 60, mr = 20, mt = 30, mb = 45;
  const double pw = o.width - ml - mr, ph = o.height - mt - mb;
  auto px = [&]( double x ) { return ml + ( x - x0 ) / ( x1 - x0 ) * pw; };
  auto py = [&]( double y ) { return mt + ( 1.0 - ( y - y0 ) / ( y1 - y0 ) ) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << o.width << "\" height=\"" << o.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << o.width / 2 << "\" y=\"18\" text-anchor=\"middle\">" << detail::xml_escape( o.title ) << "</text>\n";
  os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"black\"/>\n";
  for ( int k = 0; k <= 4; ++k )
  {
    const double xv = x0 + ( x1 - x0 ) * k / 4.0, yv = y0 + ( y1 - y0 ) * k / 4.0;
    os << "<text x=\"" << px( xv ) << "\" y=\"" << mt + ph + 15 << "\" text-anchor=\"middle\">" << xv << "</text>\n";
    os << "<text x=\"" << ml - 5 << "\" y=\"" << py( yv ) + 4 << "\" text-anchor=\"end\">" << yv << "</text>\n";
  }
  os << "<text x=\"" << ml + pw / 2 << "\" y=\"" << o.height - 8 << "\" text-anchor=\"middle\">" << detail::xml_escape( o.x_label ) << "</text>\n";
  os << "<text x=\"14\" y=\"" << mt + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 " << mt + ph / 2 << ")\">"
     << detail::xml_escape( o.y_label ) << "</text>\n";
  if ( o.diagonal )
  {
    os << "<line x1=\"" << px( x0 ) << "\" y1=\"" << py( y0 ) << "\" x2=\"" << px( x1 ) << "\" y2=\"" << py( y1 )
       << "\" stroke=\"gray\" stroke-dasharray=\"4 4\"/>\n";
  }
  for ( std::size_t s = 0; s < series.size(); ++s )
  {
    auto const* color = colors[s % std::size( colors )];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for ( std::size_t i = 0; i < std::min( series[s].x.size(), series[s].y.size() ); ++i )
    {
      if ( std::isfinite( series[s].x[i] ) && std::isfinite( series[s].y[i] ) )
      {
        os << px( series[s].x[i] ) << ',' << py( series[s].y[i] ) << ' ';
      }
    }
    os << "\"/>\n";
    os << "<text x=\"" << ml + pw - 5 << "\" y=\"" << mt + 15 + 15 * s << "\" text-anchor=\"end\" fill=\"" << color << "\">"
       << detail::xml_escape( series[s].name ) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

} // namespace mgvga
