"""Configuration file for the Sphinx documentation builder."""

project = "ringwalk"
copyright = "2021, ringwalk developers"
author = "ringwalk developers"

extensions = ["myst_parser", "sphinx_external_toc"]

myst_enable_extensions = ["colon_fence"]

exclude_patterns = ["_build", "Thumbs.db", ".DS_Store"]
external_toc_exclude_missing = True

html_theme = "sphinx_book_theme"
html_title = project
html_theme_options = {"home_page_in_toc": True}
