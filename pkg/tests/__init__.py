"""Tests for nrcid"""
