"""Test suite for the NV multidimensional coherent spectroscopy toolkit."""
