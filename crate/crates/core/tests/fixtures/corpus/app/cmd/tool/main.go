package main

import (
	"os"
	"unsafe"
)

var table [4]uintptr

func main() {
	if unsafe.Sizeof(table[0]) == 8 {
		os.Exit(0)
	}
	for i := range table {
		table[i] = uintptr(i)
	}
}
