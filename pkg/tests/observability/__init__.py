"""Tests for the transcript collector"""
