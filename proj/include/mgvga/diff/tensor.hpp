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
  \file tensor.hpp
  \brief Named parameter tensors and parameter collections
*/

#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace mgvga
{

template<class T>
using matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template<class T>
using sparse_matrix = Eigen::SparseMatrix<T, Eigen::RowMajor, int>;

class shape_error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

template<class M>
std::string shape_string( M const& m )
{
  return "[" + std::to_string( m.rows() ) + "x" + std::to_string( m.cols() ) + "]";
}

/*! \brief A 2-D parameter with its gradient buffer. */
template<class T>
struct tensor
{
  std::string name;
  matrix<T> value;
  matrix<T> grad;
  bool requires_grad{ true };

  std::vector<std::size_t> shape() const
  {
    return { static_cast<std::size_t>( value.rows() ), static_cast<std::size_t>( value.cols() ) };
  }
  std::size_t numel() const { return static_cast<std::size_t>( value.size() ); }

  void zero_grad() { grad.setZero( value.rows(), value.cols() ); }

  matrix<T>& grad_buffer()
  {
    if ( grad.rows() != value.rows() || grad.cols() != value.cols() )
    {
      grad.setZero( value.rows(), value.cols() );
    }
    return grad;
  }
};

/*! \brief Ordered collection of named tensors with stable addresses. */
template<class T>
class parameter_set
{
public:
  parameter_set() = default;
  parameter_set( parameter_set&& ) noexcept = default;
  parameter_set& operator=( parameter_set&& ) noexcept = default;

  parameter_set( parameter_set const& other ) { *this = other; }
  parameter_set& operator=( parameter_set const& other )
  {
    if ( this != &other )
    {
      items_.clear();
      for ( auto const& t : other.items_ )
      {
        items_.push_back( std::make_unique<tensor<T>>( *t ) );
      }
    }
    return *this;
  }

  tensor<T>& add( std::string name, Eigen::Index rows, Eigen::Index cols )
  {
    if ( find( name ) )
    {
      throw std::invalid_argument( "duplicate parameter '" + name + "'" );
    }
    auto t = std::make_unique<tensor<T>>();
    t->name = std::move( name );
    t->value.setZero( rows, cols );
    items_.push_back( std::move( t ) );
    return *items_.back();
  }

  tensor<T>* find( std::string const& name )
  {
    for ( auto& t : items_ )
    {
      if ( t->name == name )
      {
        return t.get();
      }
    }
    return nullptr;
  }
  tensor<T> const* find( std::string const& name ) const { return const_cast<parameter_set*>( this )->find( name ); }

  tensor<T>& get( std::string const& name )
  {
    if ( auto* t = find( name ) )
    {
      return *t;
    }
    throw std::out_of_range( "no parameter named '" + name + "'" );
  }
  tensor<T> const& get( std::string const& name ) const { return const_cast<parameter_set*>( this )->get( name ); }

  std::size_t size() const { return items_.size(); }
  tensor<T>& operator[]( std::size_t i ) { return *items_[i]; }
  tensor<T> const& operator[]( std::size_t i ) const { return *items_[i]; }

  std::size_t num_elements() const
  {
    std::size_t n = 0;
    for ( auto const& t : items_ )
    {
      n += t->numel();
    }
    return n;
  }

  void zero_grad()
  {
    for ( auto& t : items_ )
    {
      t->zero_grad();
    }
  }

  std::vector<tensor<T>*> pointers()
  {
    std::vector<tensor<T>*> out;
    for ( auto& t : items_ )
    {
      out.push_back( t.get() );
    }
    return out;
  }

  template<class U>
  parameter_set<U> cast() const
  {
    parameter_set<U> out;
    for ( auto const& t : items_ )
    {
      auto& u = out.add( t->name, t->value.rows(), t->value.cols() );
      u.value = t->value.template cast<U>();
      u.requires_grad = t->requires_grad;
    }
    return out;
  }

private:
  std::vector<std::unique_ptr<tensor<T>>> items_;
};

} // namespace mgvga
