namespace espta {}
