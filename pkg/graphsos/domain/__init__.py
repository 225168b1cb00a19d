"""Contains the domain model: graphs, their serializations and the math operating on them."""
