"""Test suite for oamlab"""
