"""Current-mode interconnect delay models and an RLC ladder simulator."""
